//! Runs a tiny grid, writes every report format, and reads the JSON back.

use dadg::config::ReportFormat;
use dadg::eval::run_experiment_on;
use dadg::report::{emit_report, load_json_report};
use dadg::RunConfig;

fn main() -> dadg::Result<()> {
    let cfg = RunConfig::from_toml_str(
        r#"
[hyper]
iterations = 50
[run]
variants = ["deepall", "dadg_cdv"]
targets = ["reversed", "src_a"]
seeds = [1, 2]
loss_curves = true
"#,
    )?;
    let ds = cfg.dataset.load()?;
    let out = run_experiment_on(&cfg, &ds)?;
    let dir = std::env::temp_dir().join("dadg-report-example");
    let written = emit_report(&out.table, &out.curves, &dir, &ReportFormat::ALL)?;
    for p in &written {
        println!("wrote {}", p.display());
    }
    let json = written.iter().find(|p| p.extension().is_some_and(|e| e == "json")).unwrap();
    let back = load_json_report(json)?;
    assert_eq!(back, out.table);
    print!("{}", back.to_csv());
    Ok(())
}
