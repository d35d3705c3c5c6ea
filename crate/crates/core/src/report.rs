//! Result tables and their CSV, JSON and markdown renderings.
//!
//! CSV layout: a header, one line per run, then one `AGG` line per
//! `(variant, target)`:
//!
//! ```text
//! variant,target,seed,accuracy,disc_accuracy,loss_F,loss_G,loss_H
//! dadg,reversed,1,0.9125,0.51,0.69,0.21,0.25
//! AGG,dadg,reversed,n=1,accuracy_mean=0.9125,accuracy_std=0,disc_accuracy_mean=0.51,disc_accuracy_std=0,failed=0
//! ```
//!
//! Missing values (no discriminator, failed run) are empty cells.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ReportFormat, RunConfig};
use crate::data::MultiDomainDataset;
use crate::error::{Error, Result};
use crate::eval::{Job, RunMetrics};
use crate::trainer::{TrainHistory, Variant};

pub const CSV_HEADER: &str = "variant,target,seed,accuracy,disc_accuracy,loss_F,loss_G,loss_H";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub variant: Variant,
    pub target: String,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub source_accuracy: Option<f64>,
    pub disc_accuracy: Option<f64>,
    pub loss_f: Option<f64>,
    pub loss_g: Option<f64>,
    pub loss_h: Option<f64>,
    pub iterations: usize,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn from_run(job: &Job, metrics: &RunMetrics, history: &TrainHistory) -> Self {
        let last = history.last();
        Self {
            variant: job.variant,
            target: job.target.clone(),
            seed: job.seed,
            accuracy: Some(metrics.target_accuracy),
            source_accuracy: Some(metrics.source_accuracy),
            disc_accuracy: metrics.disc_accuracy,
            loss_f: last.and_then(|r| r.loss_f()),
            loss_g: last.and_then(|r| r.loss_g()),
            loss_h: last.and_then(|r| r.loss_h()),
            iterations: history.reports.len(),
            error: None,
        }
    }

    pub fn failed(job: &Job, error: &Error) -> Self {
        let iterations = match error {
            Error::Diverged { iteration, .. } => *iteration,
            _ => 0,
        };
        Self {
            variant: job.variant,
            target: job.target.clone(),
            seed: job.seed,
            accuracy: None,
            source_accuracy: None,
            disc_accuracy: None,
            loss_f: None,
            loss_g: None,
            loss_h: None,
            iterations,
            error: Some(error.to_string()),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Mean and sample standard deviation (`n − 1` denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub variant: Variant,
    pub target: String,
    /// Successful runs.
    pub n: usize,
    pub failed: usize,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub disc_accuracy_mean: Option<f64>,
    pub disc_accuracy_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    /// SHA-256 of the serialised run config.
    pub config_hash: String,
    pub timestamp: String,
    pub code_version: String,
    pub protocol: String,
    pub seed_semantics: String,
    pub domains: Vec<String>,
    pub config: RunConfig,
}

pub const SEED_SEMANTICS: &str = "the run seed drives initialisation, episode sampling, mini-batch order and the \
70/30 source split; the dataset is fixed by dataset.seed";

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml_string().as_bytes()))
}

impl TableMetadata {
    pub fn new(config: &RunConfig, dataset: &MultiDomainDataset) -> Self {
        Self {
            config_hash: config_hash(config),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            protocol: config.run.protocol.name().to_string(),
            seed_semantics: SEED_SEMANTICS.to_string(),
            domains: dataset.domain_names().into_iter().map(String::from).collect(),
            config: config.clone(),
        }
    }

    /// Short hash used in file names.
    pub fn short_hash(&self) -> &str {
        &self.config_hash[..self.config_hash.len().min(12)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
}

impl ResultTable {
    pub fn new(metadata: TableMetadata, rows: Vec<ResultRow>) -> Self {
        let aggregates = compute_aggregates(&rows);
        Self {
            metadata,
            rows,
            aggregates,
        }
    }

    pub fn aggregate(&self, variant: Variant, target: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.variant == variant && a.target == target)
    }

    /// Variants in first-appearance order.
    pub fn variants(&self) -> Vec<Variant> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.variant) {
                out.push(r.variant);
            }
        }
        out
    }

    /// Targets in first-appearance order.
    pub fn targets(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.target) {
                out.push(r.target.clone());
            }
        }
        out
    }

    /// Mean target accuracy over targets, from the per-target aggregates
    /// (the "Avg." column).
    pub fn average_over_targets(&self, variant: Variant) -> Option<f64> {
        let means: Vec<f64> = self
            .targets()
            .iter()
            .filter_map(|t| self.aggregate(variant, t).and_then(|a| a.accuracy_mean))
            .collect();
        mean_std(&means).map(|(m, _)| m)
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.variant,
                r.target,
                r.seed,
                cell(r.accuracy),
                cell(r.disc_accuracy),
                cell(r.loss_f),
                cell(r.loss_g),
                cell(r.loss_h)
            );
        }
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "AGG,{},{},n={},accuracy_mean={},accuracy_std={},disc_accuracy_mean={},disc_accuracy_std={},failed={}",
                a.variant,
                a.target,
                a.n,
                cell(a.accuracy_mean),
                cell(a.accuracy_std),
                cell(a.disc_accuracy_mean),
                cell(a.disc_accuracy_std),
                a.failed
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("serialising table: {e}")))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Targets as columns, variants as rows, accuracies in percent, plus a
    /// final "Avg." column.
    pub fn to_markdown(&self) -> String {
        let targets = self.targets();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Target accuracy (%), mean ± std over seeds. Protocol `{}`, config `{}`.\n",
            self.metadata.protocol,
            self.metadata.short_hash()
        );
        let _ = writeln!(out, "| Method | {} | Avg. |", targets.join(" | "));
        let _ = writeln!(out, "|---|{}---|", "---|".repeat(targets.len()));
        for v in self.variants() {
            let cells: Vec<String> = targets
                .iter()
                .map(|t| match self.aggregate(v, t) {
                    Some(Aggregate {
                        accuracy_mean: Some(m),
                        accuracy_std: Some(s),
                        failed,
                        ..
                    }) => {
                        let mark = if *failed > 0 { format!(" ({failed} failed)") } else { String::new() };
                        format!("{:.2} ± {:.2}{mark}", 100.0 * m, 100.0 * s)
                    }
                    _ => "n/a".into(),
                })
                .collect();
            let avg = self
                .average_over_targets(v)
                .map(|a| format!("{:.2}", 100.0 * a))
                .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(out, "| {} | {} | {avg} |", v, cells.join(" | "));
        }
        out
    }
}

pub fn compute_aggregates(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut order: Vec<(Variant, String)> = Vec::new();
    let mut groups: BTreeMap<(Variant, String), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.variant, r.target.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let ok: Vec<&&ResultRow> = rs.iter().filter(|r| !r.is_error()).collect();
            let acc: Vec<f64> = ok.iter().filter_map(|r| r.accuracy).collect();
            let disc: Vec<f64> = ok.iter().filter_map(|r| r.disc_accuracy).collect();
            let (am, asd) = mean_std(&acc).unzip();
            let (dm, dsd) = mean_std(&disc).unzip();
            Aggregate {
                variant: key.0,
                target: key.1,
                n: ok.len(),
                failed: rs.len() - ok.len(),
                accuracy_mean: am,
                accuracy_std: asd,
                disc_accuracy_mean: dm,
                disc_accuracy_std: dsd,
            }
        })
        .collect()
}

/// `(iteration, loss_F, loss_G, loss_H, disc_accuracy)`
pub type CurvePoint = (usize, Option<f64>, Option<f64>, Option<f64>, Option<f64>);

/// Per-iteration losses of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub variant: Variant,
    pub target: String,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

impl LossCurve {
    pub fn from_history(job: &Job, history: &TrainHistory) -> Self {
        Self {
            variant: job.variant,
            target: job.target.clone(),
            seed: job.seed,
            points: history
                .reports
                .iter()
                .map(|r| (r.iteration, r.loss_f(), r.loss_g(), r.loss_h(), r.disc_accuracy()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("iteration,loss_F,loss_G,loss_H,disc_accuracy\n");
        for &(i, f, g, h, d) in &self.points {
            let _ = writeln!(out, "{i},{},{},{},{}", cell(f), cell(g), cell(h), cell(d));
        }
        out
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the requested formats (and loss curves) into `out_dir`, returning
/// the paths written. File names carry the short config hash.
pub fn emit_report(
    table: &ResultTable,
    curves: &[LossCurve],
    out_dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let hash = table.metadata.short_hash();
    let mut written = Vec::new();
    for &f in formats {
        let (ext, text) = match f {
            ReportFormat::Csv => ("csv", table.to_csv()),
            ReportFormat::Json => ("json", table.to_json()?),
            ReportFormat::Markdown => ("md", table.to_markdown()),
        };
        let path = out_dir.join(format!("results_{hash}.{ext}"));
        write_file(&path, &text)?;
        written.push(path);
    }
    for c in curves {
        let path = out_dir.join(format!("curve_{hash}_{}_{}_seed{}.csv", c.variant, c.target, c.seed));
        write_file(&path, &c.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_json_report(path: &Path) -> Result<ResultTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ResultTable::from_json(&text).map_err(|e| Error::Report {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn row(variant: Variant, target: &str, seed: u64, acc: f64) -> ResultRow {
        ResultRow {
            variant,
            target: target.into(),
            seed,
            accuracy: Some(acc),
            source_accuracy: Some(1.0),
            disc_accuracy: Some(0.5),
            loss_f: Some(0.69),
            loss_g: Some(0.2),
            loss_h: Some(0.3),
            iterations: 10,
            error: None,
        }
    }

    #[test]
    fn sample_standard_deviation() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), Some((7.0, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }

    #[test]
    fn error_rows_are_kept_but_not_averaged() {
        let mut rows = vec![row(Variant::Dadg, "t", 1, 0.6), row(Variant::Dadg, "t", 2, 0.8)];
        let mut bad = row(Variant::Dadg, "t", 3, 0.0);
        bad.accuracy = None;
        bad.error = Some("diverged".into());
        rows.push(bad);
        let aggs = compute_aggregates(&rows);
        assert_eq!(aggs.len(), 1);
        assert_eq!((aggs[0].n, aggs[0].failed), (2, 1));
        assert!((aggs[0].accuracy_mean.unwrap() - 0.7).abs() < 1e-15);
    }
}
