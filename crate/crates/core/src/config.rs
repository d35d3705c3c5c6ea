//! Run configuration.
//!
//! The file format is TOML restricted to scalar and array values under five
//! sections. `hyper.alpha = 1e-4` and `[hyper]\nalpha = 1e-4` are the same key.
//! Every key is optional. Missing keys take their defaults, and unknown keys
//! are errors.
//!
//! ```toml
//! config_version = 1
//!
//! [dataset]
//! source = "synthetic"        # or "csv"
//! family = "spurious_shift"   # or "rotated_moons"
//! seed = 0
//! # samples_per_domain = 400  # family preset when omitted
//! # noise_sigma = 0.5         # family preset when omitted
//! # path = "data/pacs"        # required when source = "csv"
//!
//! [arch]
//! feature_dim = 32
//! extractor_hidden = [64]
//! disc_hidden = [1024, 1024]
//! activation = "relu"         # or "tanh"
//! feature_activation = true
//!
//! [hyper]
//! alpha = 5e-5
//! beta = 5e-4
//! gamma = 5e-4
//! lambda = 1.0
//! iterations = 2000
//! batch_dal = 64
//! batch_cdv = 32
//! outer_mode = "combined"     # "literal", "first_order"
//!
//! [optim]
//! momentum = 0.9
//! weight_decay = 5e-5
//! psi_momentum = true
//! theta_dal_momentum = false
//! outer_momentum = true
//!
//! [run]
//! variants = ["deepall", "dadg_dal", "dadg_cdv", "dadg"]
//! targets = []                # empty: every domain in turn
//! seeds = [1, 2, 3, 4, 5]
//! protocol = "full_target"    # or "vlcs_70_30"
//! precision = "f64"           # or "f32"
//! jobs = 1                    # 0: one per core
//! out_dir = "runs"            # default taken from $DADG_OUT_DIR when set
//! formats = ["csv", "json", "markdown"]
//! loss_curves = false
//! ```
//!
//! Command-line overrides use the same dotted keys (`--hyper.gamma 0`). The
//! value is read as a TOML value, falling back to a bare string, and list
//! keys also accept comma-separated strings (`--run.seeds 1,2,3`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::data::{generate_synthetic, load_csv_dataset, Family, MultiDomainDataset, Protocol, SyntheticSpec};
use crate::error::Result;
use crate::model::{Activation, ArchSpec};
use crate::trainer::{HyperParams, Variant};

pub const CONFIG_VERSION: i64 = 1;
pub const OUT_DIR_ENV: &str = "DADG_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: expected {expected}, found {found}")]
    Type {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("config key `{0}` is required")]
    Missing(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    #[default]
    Synthetic,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown];

    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "markdown",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ReportFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown format `{s}` (expected csv, json or markdown)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub source: DatasetSource,
    pub family: Family,
    pub seed: u64,
    pub samples_per_domain: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub path: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            source: DatasetSource::Synthetic,
            family: Family::SpuriousShift,
            seed: 0,
            samples_per_domain: None,
            noise_sigma: None,
            path: None,
        }
    }
}

impl DatasetConfig {
    /// Generator settings for a synthetic source.
    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let mut spec = match self.family {
            Family::RotatedMoons => SyntheticSpec::rotated_moons(self.seed),
            Family::SpuriousShift => SyntheticSpec::spurious_shift(self.seed),
        };
        if let Some(n) = self.samples_per_domain {
            spec.samples_per_domain = n;
        }
        if let Some(s) = self.noise_sigma {
            spec.noise_sigma = s;
        }
        spec
    }

    pub fn load(&self) -> Result<MultiDomainDataset> {
        Ok(match self.source {
            DatasetSource::Synthetic => generate_synthetic(&self.synthetic_spec())?,
            DatasetSource::Csv => {
                let path = self.path.as_ref().ok_or_else(|| ConfigError::Missing("dataset.path".into()))?;
                load_csv_dataset(path)?
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub feature_dim: usize,
    pub extractor_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub activation: Activation,
    pub feature_activation: bool,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            feature_dim: 32,
            extractor_hidden: vec![64],
            disc_hidden: vec![1024, 1024],
            activation: Activation::Relu,
            feature_activation: true,
        }
    }
}

impl ArchConfig {
    pub fn build(&self, input_dim: usize, num_classes: usize) -> ArchSpec {
        ArchSpec::new(input_dim, self.feature_dim, num_classes)
            .with_extractor_hidden(self.extractor_hidden.clone())
            .with_disc_hidden(self.disc_hidden.clone())
            .with_activation(self.activation)
            .with_feature_activation(self.feature_activation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub variants: Vec<Variant>,
    /// Target domain names; empty means every domain in turn.
    pub targets: Vec<String>,
    pub seeds: Vec<u64>,
    pub protocol: Protocol,
    pub precision: Precision,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
    pub loss_curves: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            targets: Vec::new(),
            seeds: vec![1, 2, 3, 4, 5],
            protocol: Protocol::FullTarget,
            precision: Precision::F64,
            jobs: 1,
            out_dir: PathBuf::from("runs"),
            formats: ReportFormat::ALL.to_vec(),
            loss_curves: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub config_version: i64,
    pub dataset: DatasetConfig,
    pub arch: ArchConfig,
    pub hyper: HyperParams,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            config_version: CONFIG_VERSION,
            dataset: DatasetConfig::default(),
            arch: ArchConfig::default(),
            hyper: HyperParams::default(),
            run: RunSection::default(),
        }
    }
}

fn type_name(v: &Value) -> String {
    match v {
        Value::String(s) => format!("string {s:?}"),
        Value::Integer(i) => format!("integer {i}"),
        Value::Float(f) => format!("float {f}"),
        Value::Boolean(b) => format!("boolean {b}"),
        Value::Datetime(d) => format!("datetime {d}"),
        Value::Array(_) => "array".into(),
        Value::Table(_) => "table".into(),
    }
}

fn mismatch(key: &str, expected: &'static str, v: &Value) -> ConfigError {
    ConfigError::Type {
        key: key.into(),
        expected,
        found: type_name(v),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(mismatch(key, "a number", v)),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(mismatch(key, "a non-negative integer", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    as_u64(key, v).map(|x| x as usize)
}

fn as_bool(key: &str, v: &Value) -> Result<bool, ConfigError> {
    v.as_bool().ok_or_else(|| mismatch(key, "a boolean", v))
}

fn as_str<'v>(key: &str, v: &'v Value) -> Result<&'v str, ConfigError> {
    v.as_str().ok_or_else(|| mismatch(key, "a string", v))
}

fn parse_named<T: std::str::FromStr<Err = String>>(key: &str, v: &Value) -> Result<T, ConfigError> {
    as_str(key, v)?.parse().map_err(|e: String| invalid(key, e))
}

/// Array elements; a string is split on commas so CLI lists stay short.
fn list_items(key: &str, v: &Value) -> Result<Vec<Value>, ConfigError> {
    match v {
        Value::Array(items) => Ok(items.clone()),
        Value::String(s) if s.trim().is_empty() => Ok(Vec::new()),
        Value::String(s) => Ok(s.split(',').map(|p| parse_value(p.trim())).collect()),
        Value::Integer(_) | Value::Float(_) | Value::Boolean(_) => Ok(vec![v.clone()]),
        _ => Err(mismatch(key, "an array", v)),
    }
}

fn list_of<T>(key: &str, v: &Value, f: impl Fn(&str, &Value) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    list_items(key, v)?
        .iter()
        .enumerate()
        .map(|(i, item)| f(&format!("{key}[{i}]"), item))
        .collect()
}

/// Reads a CLI value as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

impl RunConfig {
    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<(), ConfigError> {
        let d = &mut self.dataset;
        let a = &mut self.arch;
        let h = &mut self.hyper;
        let r = &mut self.run;
        match key {
            "config_version" => {
                let found = v.as_integer().ok_or_else(|| mismatch(key, "an integer", v))?;
                if found != CONFIG_VERSION {
                    return Err(invalid(key, format!("unsupported version {found} (this build reads {CONFIG_VERSION})")));
                }
                self.config_version = found;
            }
            "dataset.source" => {
                d.source = match as_str(key, v)? {
                    "synthetic" => DatasetSource::Synthetic,
                    "csv" => DatasetSource::Csv,
                    other => return Err(invalid(key, format!("unknown source `{other}` (expected synthetic or csv)"))),
                }
            }
            "dataset.family" => d.family = parse_named(key, v)?,
            "dataset.seed" => d.seed = as_u64(key, v)?,
            "dataset.samples_per_domain" => d.samples_per_domain = Some(as_usize(key, v)?),
            "dataset.noise_sigma" => d.noise_sigma = Some(as_f64(key, v)?),
            "dataset.path" => d.path = Some(PathBuf::from(as_str(key, v)?)),

            "arch.feature_dim" => a.feature_dim = as_usize(key, v)?,
            "arch.extractor_hidden" => a.extractor_hidden = list_of(key, v, as_usize)?,
            "arch.disc_hidden" => a.disc_hidden = list_of(key, v, as_usize)?,
            "arch.activation" => a.activation = parse_named(key, v)?,
            "arch.feature_activation" => a.feature_activation = as_bool(key, v)?,

            "hyper.alpha" => h.alpha = as_f64(key, v)?,
            "hyper.beta" => h.beta = as_f64(key, v)?,
            "hyper.gamma" => h.gamma = as_f64(key, v)?,
            "hyper.lambda" => h.lambda = as_f64(key, v)?,
            "hyper.iterations" => h.iterations = as_usize(key, v)?,
            "hyper.batch_dal" => h.batch_dal = as_usize(key, v)?,
            "hyper.batch_cdv" => h.batch_cdv = as_usize(key, v)?,
            "hyper.outer_mode" => h.outer_mode = parse_named(key, v)?,

            "optim.momentum" => h.momentum = as_f64(key, v)?,
            "optim.weight_decay" => h.weight_decay = as_f64(key, v)?,
            "optim.psi_momentum" => h.psi_momentum = as_bool(key, v)?,
            "optim.theta_dal_momentum" => h.theta_dal_momentum = as_bool(key, v)?,
            "optim.outer_momentum" => h.outer_momentum = as_bool(key, v)?,

            "run.variants" => r.variants = list_of(key, v, parse_named)?,
            "run.targets" => r.targets = list_of(key, v, |k, x| as_str(k, x).map(str::to_string))?,
            "run.seeds" => r.seeds = list_of(key, v, as_u64)?,
            "run.protocol" => r.protocol = parse_named(key, v)?,
            "run.precision" => {
                r.precision = match as_str(key, v)? {
                    "f64" => Precision::F64,
                    "f32" => Precision::F32,
                    other => return Err(invalid(key, format!("unknown precision `{other}` (expected f64 or f32)"))),
                }
            }
            "run.jobs" => r.jobs = as_usize(key, v)?,
            "run.out_dir" => r.out_dir = PathBuf::from(as_str(key, v)?),
            "run.formats" => r.formats = list_of(key, v, parse_named)?,
            "run.loss_curves" => r.loss_curves = as_bool(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies a command-line override such as (`hyper.gamma`, `"0"`).
    pub fn apply_override(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        self.set(key, &parse_value(raw))
    }

    /// Checks every cross-key constraint. Called by the parsers, and again
    /// by the CLI after overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let h = &self.hyper;
        for (key, val) in [
            ("hyper.alpha", h.alpha),
            ("hyper.beta", h.beta),
            ("hyper.gamma", h.gamma),
            ("hyper.lambda", h.lambda),
            ("optim.momentum", h.momentum),
            ("optim.weight_decay", h.weight_decay),
        ] {
            if !val.is_finite() || val < 0.0 {
                return Err(invalid(key, format!("must be finite and >= 0, got {val}")));
            }
        }
        if h.momentum >= 1.0 {
            return Err(invalid("optim.momentum", "must be < 1"));
        }
        if h.batch_dal < 2 {
            return Err(invalid("hyper.batch_dal", "must be at least 2"));
        }
        if h.batch_cdv < 1 {
            return Err(invalid("hyper.batch_cdv", "must be at least 1"));
        }
        if self.arch.feature_dim == 0 {
            return Err(invalid("arch.feature_dim", "must be positive"));
        }
        for (key, dims) in [("arch.extractor_hidden", &self.arch.extractor_hidden), ("arch.disc_hidden", &self.arch.disc_hidden)] {
            if dims.contains(&0) {
                return Err(invalid(key, "layer widths must be positive"));
            }
        }
        if let Some(s) = self.dataset.noise_sigma {
            if !s.is_finite() || s < 0.0 {
                return Err(invalid("dataset.noise_sigma", "must be finite and >= 0"));
            }
        }
        if self.dataset.source == DatasetSource::Csv && self.dataset.path.is_none() {
            return Err(ConfigError::Missing("dataset.path".into()));
        }
        let r = &self.run;
        if r.variants.is_empty() {
            return Err(invalid("run.variants", "at least one variant is required"));
        }
        if r.seeds.is_empty() {
            return Err(invalid("run.seeds", "at least one seed is required"));
        }
        if let Some(s) = r.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            return Err(invalid("run.seeds", format!("seed {s} exceeds {}", i64::MAX)));
        }
        if self.dataset.seed > i64::MAX as u64 {
            return Err(invalid("dataset.seed", format!("exceeds {}", i64::MAX)));
        }
        for (key, dup) in [
            ("run.variants", has_duplicates(&r.variants)),
            ("run.seeds", has_duplicates(&r.seeds)),
            ("run.targets", has_duplicates(&r.targets)),
            ("run.formats", has_duplicates(&r.formats)),
        ] {
            if dup {
                return Err(invalid(key, "duplicate entries"));
            }
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. `$DADG_OUT_DIR`, when set,
    /// replaces the default output directory but not an explicit `run.out_dir`.
    pub fn from_toml_str(text: &str) -> Result<RunConfig, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let mut entries = Vec::new();
        flatten("", &table, &mut entries);
        let mut cfg = RunConfig::default();
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.run.out_dir = PathBuf::from(dir);
        }
        for (key, value) in &entries {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Config text with every key written out.
    pub fn to_toml_string(&self) -> String {
        fn strings<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Value {
            Value::Array(items.into_iter().map(|s| Value::String(s.into())).collect())
        }
        fn ints<I: IntoIterator<Item = u64>>(items: I) -> Value {
            Value::Array(items.into_iter().map(|i| Value::Integer(i as i64)).collect())
        }
        let int = |i: usize| Value::Integer(i as i64);

        let mut root = Table::new();
        root.insert("config_version".into(), Value::Integer(self.config_version));

        let d = &self.dataset;
        let mut t = Table::new();
        let source = match d.source {
            DatasetSource::Synthetic => "synthetic",
            DatasetSource::Csv => "csv",
        };
        t.insert("source".into(), source.into());
        t.insert("family".into(), d.family.name().into());
        t.insert("seed".into(), Value::Integer(d.seed as i64));
        if let Some(n) = d.samples_per_domain {
            t.insert("samples_per_domain".into(), int(n));
        }
        if let Some(s) = d.noise_sigma {
            t.insert("noise_sigma".into(), Value::Float(s));
        }
        if let Some(p) = &d.path {
            t.insert("path".into(), p.to_string_lossy().into_owned().into());
        }
        root.insert("dataset".into(), Value::Table(t));

        let a = &self.arch;
        let mut t = Table::new();
        t.insert("feature_dim".into(), int(a.feature_dim));
        t.insert("extractor_hidden".into(), ints(a.extractor_hidden.iter().map(|&x| x as u64)));
        t.insert("disc_hidden".into(), ints(a.disc_hidden.iter().map(|&x| x as u64)));
        t.insert("activation".into(), a.activation.name().into());
        t.insert("feature_activation".into(), a.feature_activation.into());
        root.insert("arch".into(), Value::Table(t));

        let h = &self.hyper;
        let mut t = Table::new();
        t.insert("alpha".into(), Value::Float(h.alpha));
        t.insert("beta".into(), Value::Float(h.beta));
        t.insert("gamma".into(), Value::Float(h.gamma));
        t.insert("lambda".into(), Value::Float(h.lambda));
        t.insert("iterations".into(), int(h.iterations));
        t.insert("batch_dal".into(), int(h.batch_dal));
        t.insert("batch_cdv".into(), int(h.batch_cdv));
        t.insert("outer_mode".into(), h.outer_mode.name().into());
        root.insert("hyper".into(), Value::Table(t));

        let mut t = Table::new();
        t.insert("momentum".into(), Value::Float(h.momentum));
        t.insert("weight_decay".into(), Value::Float(h.weight_decay));
        t.insert("psi_momentum".into(), h.psi_momentum.into());
        t.insert("theta_dal_momentum".into(), h.theta_dal_momentum.into());
        t.insert("outer_momentum".into(), h.outer_momentum.into());
        root.insert("optim".into(), Value::Table(t));

        let r = &self.run;
        let mut t = Table::new();
        t.insert("variants".into(), strings(r.variants.iter().map(|v| v.name())));
        t.insert("targets".into(), strings(r.targets.iter().cloned()));
        t.insert("seeds".into(), ints(r.seeds.iter().copied()));
        t.insert("protocol".into(), r.protocol.name().into());
        let precision = match r.precision {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
        };
        t.insert("precision".into(), precision.into());
        t.insert("jobs".into(), int(r.jobs));
        t.insert("out_dir".into(), r.out_dir.to_string_lossy().into_owned().into());
        t.insert("formats".into(), strings(r.formats.iter().map(|f| f.name())));
        t.insert("loss_curves".into(), r.loss_curves.into());
        root.insert("run".into(), Value::Table(t));

        root.to_string()
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, x)| items[..i].contains(x))
}
