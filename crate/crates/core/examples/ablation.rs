//! The four variants on the spurious-cue benchmark, reversed domain held out.
//! Takes a few seconds in release mode.

use dadg::eval::run_experiment_on;
use dadg::{RunConfig, Variant};

const CONFIG: &str = r#"
[dataset]
family = "spurious_shift"

[arch]
disc_hidden = [64]

[hyper]
alpha = 0.015
iterations = 1000

[run]
variants = ["deepall", "dadg_dal", "dadg_cdv", "dadg"]
targets = ["reversed"]
seeds = [1, 2, 3]
protocol = "vlcs_70_30"
jobs = 0
"#;

fn main() -> dadg::Result<()> {
    let cfg = RunConfig::from_toml_str(CONFIG)?;
    let ds = cfg.dataset.load()?;
    let table = run_experiment_on(&cfg, &ds)?.table;
    println!("{}", table.to_markdown());
    let base = table.aggregate(Variant::DeepAll, "reversed").and_then(|a| a.accuracy_mean).unwrap_or(f64::NAN);
    for v in Variant::ALL {
        if let Some(m) = table.aggregate(v, "reversed").and_then(|a| a.accuracy_mean) {
            println!("{v:<9} {:+.2} points over deepall", 100.0 * (m - base));
        }
    }
    Ok(())
}
