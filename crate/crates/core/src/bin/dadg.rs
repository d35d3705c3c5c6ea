use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dadg::config::{ConfigError, ReportFormat, RunConfig};
use dadg::data::{generate_synthetic, write_csv_dataset, DataError};
use dadg::eval::run_experiment_on;
use dadg::report::{emit_report, load_json_report};
use dadg::{gradcheck, Error, Variant};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "dadg", version, about = "Adversarial domain generalization with meta-learned cross-domain validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured synthetic dataset in the CSV layout.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train one variant on one target with one seed.
    Train {
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the variants x targets x seeds grid and write the result table.
    Experiment {
        /// Concurrent runs (overrides run.jobs).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the gradient and meta-gradient checks.
    CheckGrads {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-emit a stored JSON table.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated subset of csv,json,markdown.
        #[arg(long, value_delimiter = ',', default_value = "csv,json,markdown")]
        format: Vec<ReportFormat>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trailing `--section.key value` (or `--section.key=value`) overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::from_toml_str("")?,
        };
        for (key, value) in parse_overrides(&self.overrides)? {
            cfg.apply_override(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            return Err(ConfigError::Syntax(format!("expected `--key value`, found `{arg}`")));
        };
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let value = it.next().ok_or_else(|| ConfigError::Missing(key.to_string()))?;
                out.push((key.to_string(), value.clone()));
            }
        }
    }
    Ok(out)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Diverged { .. } => EXIT_RUNTIME,
        Error::Io { .. } | Error::Report { .. } | Error::Data(DataError::Io { .. }) => EXIT_IO,
        Error::Config(ConfigError::Io { .. }) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn run_grid(cfg: &RunConfig, out_dir: &Path) -> dadg::Result<u8> {
    let dataset = cfg.dataset.load()?;
    let output = run_experiment_on(cfg, &dataset)?;
    report_written(&emit_report(&output.table, &output.curves, out_dir, &cfg.run.formats)?);
    println!("{}", output.table.to_markdown());
    let failed: Vec<_> = output.table.rows.iter().filter(|r| r.is_error()).collect();
    for row in &failed {
        eprintln!(
            "{} target={} seed={}: {}",
            row.variant,
            row.target,
            row.seed,
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(if failed.is_empty() { 0 } else { EXIT_RUNTIME })
}

fn run(cli: Cli) -> dadg::Result<u8> {
    match cli.command {
        Command::GenData { out, common } => {
            let cfg = common.resolve()?;
            let dataset = generate_synthetic(&cfg.dataset.synthetic_spec())?;
            write_csv_dataset(&dataset, &out)?;
            eprintln!("wrote {} domains to {}", dataset.num_domains(), out.display());
            Ok(0)
        }
        Command::Train {
            variant,
            target,
            seed,
            common,
        } => {
            let mut cfg = common.resolve()?;
            cfg.run.variants = vec![variant];
            cfg.run.targets = vec![target];
            cfg.run.seeds = vec![seed];
            cfg.run.jobs = 1;
            cfg.run.loss_curves = true;
            let out_dir = cfg.run.out_dir.clone();
            run_grid(&cfg, &out_dir)
        }
        Command::Experiment { jobs, common } => {
            let mut cfg = common.resolve()?;
            if let Some(j) = jobs {
                cfg.run.jobs = j;
                cfg.validate()?;
            }
            let out_dir = cfg.run.out_dir.clone();
            run_grid(&cfg, &out_dir)
        }
        Command::CheckGrads { seed } => {
            let results = gradcheck::run_suite(seed)?;
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                println!(
                    "{} {:<42} {:.3e} (tol {:.0e})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.value,
                    r.tolerance
                );
            }
            Ok(if ok { 0 } else { EXIT_RUNTIME })
        }
        Command::Report { input, out_dir, format } => {
            let table = load_json_report(&input)?;
            report_written(&emit_report(&table, &[], &out_dir, &format)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
