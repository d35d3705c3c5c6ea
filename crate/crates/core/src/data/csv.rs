//! On-disk layout: `root/<domain>/<class>.csv`, one example per row, no
//! header, comma-separated decimal values. `root/dataset.toml` lists the
//! domains, classes (in label order) and input width.

use std::fs;
use std::path::{Path, PathBuf};

use super::{DataError, Domain, MultiDomainDataset};
use crate::tensor::Matrix;

pub const MANIFEST_FILE: &str = "dataset.toml";
const MANIFEST_VERSION: i64 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv_dataset(dataset: &MultiDomainDataset, root: &Path) -> Result<(), DataError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    for domain in dataset.domains() {
        let dir = root.join(&domain.name);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (c, class) in dataset.class_names().iter().enumerate() {
            let mut text = String::new();
            for i in (0..domain.len()).filter(|&i| domain.labels[i] == c) {
                let cells: Vec<String> = domain.inputs.row(i).iter().map(|v| v.to_string()).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            let path = dir.join(format!("{class}.csv"));
            fs::write(&path, text).map_err(io_err(&path))?;
        }
    }
    let mut manifest = toml::Table::new();
    manifest.insert("version".into(), toml::Value::Integer(MANIFEST_VERSION));
    manifest.insert("input_dim".into(), toml::Value::Integer(dataset.input_dim() as i64));
    let strings = |v: Vec<&str>| toml::Value::Array(v.into_iter().map(|s| s.into()).collect());
    manifest.insert("domains".into(), strings(dataset.domain_names()));
    manifest.insert(
        "classes".into(),
        strings(dataset.class_names().iter().map(String::as_str).collect()),
    );
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_string()).map_err(io_err(&path))?;
    Ok(())
}

struct Manifest {
    input_dim: Option<usize>,
    domains: Option<Vec<String>>,
    classes: Option<Vec<String>>,
}

fn read_manifest(path: &Path) -> Result<Option<Manifest>, DataError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: String| DataError::Manifest {
        file: path.to_path_buf(),
        message,
    };
    let table: toml::Table = text.parse().map_err(|e| bad(format!("{e}")))?;
    let strings = |key: &str| -> Result<Option<Vec<String>>, DataError> {
        match table.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| bad(format!("`{key}` must list strings")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(bad(format!("`{key}` must be an array"))),
        }
    };
    for key in table.keys() {
        if !["version", "input_dim", "domains", "classes"].contains(&key.as_str()) {
            return Err(bad(format!("unknown key `{key}`")));
        }
    }
    if let Some(v) = table.get("version") {
        if v.as_integer() != Some(MANIFEST_VERSION) {
            return Err(bad(format!("unsupported version {v}")));
        }
    }
    let input_dim = match table.get("input_dim") {
        None => None,
        Some(v) => match v.as_integer() {
            Some(d) if d > 0 => Some(d as usize),
            _ => return Err(bad("`input_dim` must be a positive integer".into())),
        },
    };
    Ok(Some(Manifest {
        input_dim,
        domains: strings("domains")?,
        classes: strings("classes")?,
    }))
}

fn sorted_entries(dir: &Path, want_dirs: bool) -> Result<Vec<PathBuf>, DataError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let keep = if want_dirs {
            path.is_dir()
        } else {
            path.is_file() && path.extension().and_then(|e| e.to_str()) == Some("csv")
        };
        if keep {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses one class file; `width` is fixed by the first row seen anywhere.
fn parse_rows(path: &Path, width: &mut Option<usize>) -> Result<Vec<Vec<f64>>, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(DataError::Ragged {
                file: path.to_path_buf(),
                line: i + 1,
                expected,
                found: cells.len(),
            });
        }
        let row = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    DataError::NonNumeric {
                        file: path.to_path_buf(),
                        line: i + 1,
                        column: c + 1,
                        value: cell.to_string(),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Loads `root/<domain>/<class>.csv`. Domains are ordered lexicographically;
/// class order comes from the manifest when present, otherwise it is
/// lexicographic too.
pub fn load_csv_dataset(root: &Path) -> Result<MultiDomainDataset, DataError> {
    let manifest_path = root.join(MANIFEST_FILE);
    let manifest = read_manifest(&manifest_path)?;
    let domain_dirs = sorted_entries(root, true)?;

    let mut files: Vec<(String, Vec<PathBuf>)> = Vec::new();
    for dir in &domain_dirs {
        files.push((stem_dir(dir), sorted_entries(dir, false)?));
    }

    let classes: Vec<String> = match manifest.as_ref().and_then(|m| m.classes.clone()) {
        Some(c) => c,
        None => {
            let mut c: Vec<String> = files.iter().flat_map(|(_, fs)| fs.iter().map(|f| stem(f))).collect();
            c.sort();
            c.dedup();
            c
        }
    };

    if let Some(listed) = manifest.as_ref().and_then(|m| m.domains.as_ref()) {
        let mut listed = listed.clone();
        listed.sort();
        let found: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
        if listed != found {
            return Err(DataError::Manifest {
                file: manifest_path.clone(),
                message: format!("lists domains {listed:?} but the directory holds {found:?}"),
            });
        }
    }

    let mut width = manifest.as_ref().and_then(|m| m.input_dim);
    let mut domains = Vec::new();
    for (name, class_files) in files {
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for file in class_files {
            let class = stem(&file);
            let label = classes.iter().position(|c| *c == class).ok_or_else(|| {
                DataError::Manifest {
                    file: manifest_path.clone(),
                    message: format!("class file {} is not listed", file.display()),
                }
            })?;
            for row in parse_rows(&file, &mut width)? {
                data.extend(row);
                labels.push(label);
            }
        }
        if labels.is_empty() {
            return Err(DataError::EmptyDomain(name));
        }
        let dim = width.unwrap_or(0);
        domains.push(Domain {
            name,
            inputs: Matrix::from_vec(labels.len(), dim, data)
                .map_err(|e| DataError::Invalid(e.to_string()))?,
            labels,
        });
    }
    if domains.is_empty() {
        return Err(DataError::Invalid(format!("no domain directories under {}", root.display())));
    }
    MultiDomainDataset::new(domains, classes, width.unwrap_or(0))
}

fn stem_dir(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
