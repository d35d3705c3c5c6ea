//! Multi-domain datasets, synthetic domain-shift generators, the on-disk CSV
//! layout, leave-one-domain-out split plans and mini-batch iterators.

mod batch;
mod csv;
mod split;
mod synthetic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::tensor::Matrix;

pub use batch::BatchIterator;
pub use csv::{load_csv_dataset, write_csv_dataset, MANIFEST_FILE};
pub use split::{make_lodo_splits, Protocol, SourceSplit, SplitPlan};
pub use synthetic::{generate_synthetic, DomainParams, Family, SyntheticSpec};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}:{line}: expected {expected} columns, found {found}", file.display())]
    Ragged {
        file: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{}:{line}: column {column} is not a number: `{value}`", file.display())]
    NonNumeric {
        file: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("domain `{0}` has no examples")]
    EmptyDomain(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("{}: {message}", file.display())]
    Manifest { file: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid dataset: {0}")]
    Invalid(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("cannot iterate over an empty index list")]
    EmptyIndices,
}

/// All examples of one domain, one row per example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub inputs: Matrix<f64>,
    pub labels: Vec<usize>,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Labelled examples grouped by domain over a shared label space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiDomainDataset {
    domains: Vec<Domain>,
    class_names: Vec<String>,
    input_dim: usize,
}

impl MultiDomainDataset {
    pub fn new(
        domains: Vec<Domain>,
        class_names: Vec<String>,
        input_dim: usize,
    ) -> Result<Self, DataError> {
        if class_names.len() < 2 {
            return Err(DataError::Invalid(format!(
                "need at least 2 classes, got {}",
                class_names.len()
            )));
        }
        if domains.is_empty() {
            return Err(DataError::Invalid("no domains".into()));
        }
        for (i, d) in domains.iter().enumerate() {
            if d.is_empty() {
                return Err(DataError::EmptyDomain(d.name.clone()));
            }
            if d.inputs.rows() != d.labels.len() {
                return Err(DataError::Invalid(format!(
                    "domain `{}` has {} inputs and {} labels",
                    d.name,
                    d.inputs.rows(),
                    d.labels.len()
                )));
            }
            if d.inputs.cols() != input_dim {
                return Err(DataError::Invalid(format!(
                    "domain `{}` has width {}, expected {input_dim}",
                    d.name,
                    d.inputs.cols()
                )));
            }
            if let Some(&y) = d.labels.iter().find(|&&y| y >= class_names.len()) {
                return Err(DataError::Invalid(format!(
                    "domain `{}` has label {y} but only {} classes",
                    d.name,
                    class_names.len()
                )));
            }
            if !d.inputs.all_finite() {
                return Err(DataError::Invalid(format!(
                    "domain `{}` contains non-finite inputs",
                    d.name
                )));
            }
            if domains[..i].iter().any(|o| o.name == d.name) {
                return Err(DataError::Invalid(format!("duplicate domain `{}`", d.name)));
            }
        }
        Ok(Self {
            domains,
            class_names,
            input_dim,
        })
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, index: usize) -> &Domain {
        &self.domains[index]
    }

    pub fn num_domains(&self) -> usize {
        self.domains.len()
    }

    pub fn domain_names(&self) -> Vec<&str> {
        self.domains.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn domain_index(&self, name: &str) -> Result<usize, DataError> {
        self.domains
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| DataError::UnknownDomain(name.to_string()))
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Rows `indices` of one domain as an input matrix and label vector.
    pub fn gather(&self, domain: usize, indices: &[usize]) -> (Matrix<f64>, Vec<usize>) {
        let d = &self.domains[domain];
        let mut data = Vec::with_capacity(indices.len() * self.input_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(d.inputs.row(i));
            labels.push(d.labels[i]);
        }
        let inputs = Matrix::from_vec(indices.len(), self.input_dim, data)
            .expect("rows have the dataset width");
        (inputs, labels)
    }

    /// Keeps only the listed input columns (used for probes on a subspace).
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self, DataError> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.input_dim) {
            return Err(DataError::Invalid(format!("column {c} out of range")));
        }
        let domains = self
            .domains
            .iter()
            .map(|d| {
                let rows: Vec<Vec<f64>> = (0..d.len())
                    .map(|i| columns.iter().map(|&c| d.inputs.row(i)[c]).collect())
                    .collect();
                Domain {
                    name: d.name.clone(),
                    inputs: Matrix::from_rows(&rows).expect("uniform width"),
                    labels: d.labels.clone(),
                }
            })
            .collect();
        Self::new(domains, self.class_names.clone(), columns.len())
    }
}
