//! Reading and writing datasets and small JSON documents.
//!
//! A dataset on disk is three files: an edge list (two integer columns,
//! optional `src,dst` header), a delimited feature table with one row per
//! node in id order, and a JSON meta document declaring column kinds, the
//! target column and the task kind.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, ColumnKind, Dataset, FeatureTable, TaskKind, TaskSpec, MISSING_CATEGORY};
use crate::error::{Error, Result};
use crate::graph::{BuildReport, Graph};

pub const EDGES_FILE: &str = "edges.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const META_FILE: &str = "meta.json";

/// Contents of the dataset meta document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Kind (`numerical` or `categorical`) of every feature column.
    pub columns: BTreeMap<String, String>,
    pub target: String,
    pub task: String,
    /// Optional fixed category vocabularies, in code order.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vocab: BTreeMap<String, Vec<String>>,
    /// Optional fixed class order for classification targets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
}

/// Side information gathered while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub edges_read: usize,
    pub graph: BuildReport,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn is_missing_number(s: &str) -> bool {
    s.is_empty() || s == MISSING_CATEGORY || s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("na")
}

fn is_missing_category(s: &str) -> bool {
    s.is_empty() || s == MISSING_CATEGORY
}

/// Parses an edge list file into `(src, dst)` pairs, with 1-based line numbers in errors.
pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let is_header = first && fields.first().is_some_and(|f| f.parse::<i64>().is_err());
        first = false;
        if is_header {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::parse(path, i + 1, format!("expected 2 columns, found {}", fields.len())));
        }
        let id = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| Error::parse(path, i + 1, format!("`{f}` is not a valid node id")))
        };
        edges.push((id(fields[0])?, id(fields[1])?));
    }
    Ok(edges)
}

fn sniff_delimiter(path: &Path) -> Result<u8> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("");
    Ok(if !header.contains(',') && header.contains('\t') {
        b'\t'
    } else {
        b','
    })
}

fn sort_labels(mut labels: Vec<String>) -> Vec<String> {
    if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
    labels
}

/// Loads and validates a dataset from its three files.
pub fn load_dataset(edge_path: &Path, feature_path: &Path, meta_path: &Path) -> Result<(Dataset, LoadReport)> {
    let meta: DatasetMeta = read_json(meta_path)?;
    let task: TaskKind = meta.task.parse()?;
    let mut kinds = HashMap::new();
    for (name, kind) in &meta.columns {
        let kind: ColumnKind = kind
            .parse()
            .map_err(|_| Error::parse(meta_path, 0, format!("column `{name}` has unknown kind `{kind}`")))?;
        kinds.insert(name.as_str(), kind);
    }

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(feature_path)?)
        .from_path(feature_path)
        .map_err(|e| Error::parse(feature_path, 1, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(feature_path, 1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let target_idx = header
        .iter()
        .position(|h| *h == meta.target)
        .ok_or_else(|| Error::parse(feature_path, 1, format!("target column `{}` missing", meta.target)))?;
    for (j, name) in header.iter().enumerate() {
        if j != target_idx && !kinds.contains_key(name.as_str()) {
            return Err(Error::parse(meta_path, 0, format!("column `{name}` has no declared kind")));
        }
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut lines = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(feature_path, line, e.to_string())
        })?;
        lines.push(rec.position().map_or(0, |p| p.line() as usize));
        for (j, field) in rec.iter().enumerate() {
            raw[j].push(field.trim().to_owned());
        }
    }
    let n = lines.len();

    let mut columns = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let col = match kinds[name.as_str()] {
            ColumnKind::Numerical => {
                let mut values = Vec::with_capacity(n);
                for (r, s) in raw[j].iter().enumerate() {
                    if is_missing_number(s) {
                        values.push(f64::NAN);
                    } else {
                        values.push(s.parse::<f64>().map_err(|_| {
                            Error::parse(
                                feature_path,
                                lines[r],
                                format!("non-numeric value `{s}` in numerical column `{name}`"),
                            )
                        })?);
                    }
                }
                Column::numerical(name.clone(), values)
            }
            ColumnKind::Categorical => {
                let vocab = match meta.vocab.get(name) {
                    Some(v) => v.clone(),
                    None => raw[j]
                        .iter()
                        .filter(|s| !is_missing_category(s))
                        .cloned()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                };
                let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(k, v)| (v.as_str(), k as u32)).collect();
                let mut codes = Vec::with_capacity(n);
                for (r, s) in raw[j].iter().enumerate() {
                    if is_missing_category(s) {
                        codes.push(None);
                    } else {
                        let code = index.get(s.as_str()).ok_or_else(|| {
                            Error::parse(feature_path, lines[r], format!("`{s}` is not in the vocabulary of `{name}`"))
                        })?;
                        codes.push(Some(*code));
                    }
                }
                Column::categorical(name.clone(), codes, vocab)
            }
        };
        columns.push(col);
    }
    let features = FeatureTable::new(n, columns)?;

    let target_raw = &raw[target_idx];
    let spec = if task.is_classification() {
        let classes = if meta.classes.is_empty() {
            sort_labels(
                target_raw
                    .iter()
                    .filter(|s| !is_missing_category(s))
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
            )
        } else {
            meta.classes.clone()
        };
        let index: HashMap<&str, u32> = classes.iter().enumerate().map(|(k, v)| (v.as_str(), k as u32)).collect();
        let mut labels = Vec::with_capacity(n);
        for (r, s) in target_raw.iter().enumerate() {
            if is_missing_category(s) || s.eq_ignore_ascii_case("nan") {
                labels.push(None);
            } else {
                let c = index
                    .get(s.as_str())
                    .ok_or_else(|| Error::parse(feature_path, lines[r], format!("unknown class `{s}`")))?;
                labels.push(Some(*c));
            }
        }
        TaskSpec::classification(task, labels, classes)?
    } else {
        let mut values = Vec::with_capacity(n);
        for (r, s) in target_raw.iter().enumerate() {
            if is_missing_number(s) {
                values.push(f64::NAN);
            } else {
                values.push(
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(feature_path, lines[r], format!("non-numeric target `{s}`")))?,
                );
            }
        }
        TaskSpec::regression(values)
    };

    let edges = read_edges(edge_path)?;
    let edges_read = edges.len();
    for (k, &(u, v)) in edges.iter().enumerate() {
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!(
                "{}: edge #{} ({u}, {v}) references a node id out of range (n = {n})",
                edge_path.display(),
                k + 1
            )));
        }
    }
    let (graph, graph_report) = Graph::from_edges(n, edges)?;
    let dataset = Dataset::new(graph, features, spec)?;
    Ok((
        dataset,
        LoadReport {
            edges_read,
            graph: graph_report,
        },
    ))
}

/// Loads a dataset directory written by [`write_dataset`].
pub fn load_dataset_dir(dir: &Path) -> Result<(Dataset, LoadReport)> {
    load_dataset(&dir.join(EDGES_FILE), &dir.join(FEATURES_FILE), &dir.join(META_FILE))
}

fn target_column_name(dataset: &Dataset) -> String {
    let mut name = String::from("target");
    while dataset.features.columns().iter().any(|c| c.name == name) {
        name.insert(0, '_');
    }
    name
}

/// Writes a dataset in the canonical layout: `edges.csv`, `features.csv`, `meta.json`.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let edge_path = dir.join(EDGES_FILE);
    let mut text = String::from("src,dst\n");
    for (u, v) in dataset.graph.edges() {
        text.push_str(&format!("{u},{v}\n"));
    }
    fs::write(&edge_path, text).map_err(|e| Error::io(&edge_path, e))?;

    let target = target_column_name(dataset);
    let feature_path = dir.join(FEATURES_FILE);
    let csv_err = |e: csv::Error| Error::Io {
        path: feature_path.clone(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(&feature_path).map_err(csv_err)?;
    let mut header: Vec<&str> = dataset.features.columns().iter().map(|c| c.name.as_str()).collect();
    header.push(&target);
    w.write_record(&header).map_err(csv_err)?;
    let task = &dataset.task;
    for i in 0..dataset.n_nodes() {
        let mut row: Vec<String> = dataset
            .features
            .columns()
            .iter()
            .map(|c| match &c.data {
                ColumnData::Numerical(v) => format_number(v[i]),
                ColumnData::Categorical { codes, vocab } => {
                    codes[i].map_or(MISSING_CATEGORY.to_owned(), |k| vocab[k as usize].clone())
                }
            })
            .collect();
        row.push(match task.labels() {
            Some(labels) => labels[i].map_or(MISSING_CATEGORY.to_owned(), |c| task.class_names()[c as usize].clone()),
            None => format_number(task.target_value(i)),
        });
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&feature_path, e))?;

    let meta = DatasetMeta {
        columns: dataset
            .features
            .columns()
            .iter()
            .map(|c| {
                let kind = match c.kind() {
                    ColumnKind::Numerical => "numerical",
                    ColumnKind::Categorical => "categorical",
                };
                (c.name.clone(), kind.to_owned())
            })
            .collect(),
        target,
        task: match task.kind() {
            TaskKind::Binary => "binary",
            TaskKind::Multiclass => "multiclass",
            TaskKind::Regression => "regression",
        }
        .to_owned(),
        vocab: dataset
            .features
            .columns()
            .iter()
            .filter_map(|c| match &c.data {
                ColumnData::Categorical { vocab, .. } => Some((c.name.clone(), vocab.clone())),
                ColumnData::Numerical(_) => None,
            })
            .collect(),
        classes: task.class_names().to_vec(),
    };
    write_json(&dir.join(META_FILE), &meta)
}

/// Formats a real value so that parsing it back yields the same bits; NaN is written as `NaN`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x}")
    }
}
