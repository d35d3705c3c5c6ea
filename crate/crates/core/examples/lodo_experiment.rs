//! Leave-one-domain-out over every rotated-moons domain for DeepAll and DADG.

use dadg::eval::run_experiment_on;
use dadg::RunConfig;

const CONFIG: &str = r#"
[dataset]
family = "rotated_moons"

[arch]
disc_hidden = [64]

[hyper]
iterations = 300
gamma = 0.01
beta = 0.01

[run]
variants = ["deepall", "dadg"]
seeds = [1, 2]
jobs = 0
"#;

fn main() -> dadg::Result<()> {
    let cfg = RunConfig::from_toml_str(CONFIG)?;
    let ds = cfg.dataset.load()?;
    let out = run_experiment_on(&cfg, &ds)?;
    println!("{}", out.table.to_markdown());
    Ok(())
}
