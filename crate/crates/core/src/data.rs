//! Node feature tables, prediction targets and datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};

/// Token used for a missing categorical value in text files.
pub const MISSING_CATEGORY: &str = "∅";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numerical,
    Categorical,
}

impl std::str::FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numerical" => Ok(ColumnKind::Numerical),
            "categorical" => Ok(ColumnKind::Categorical),
            other => Err(Error::InvalidInput(format!("unknown column kind `{other}`"))),
        }
    }
}

/// Values of one feature column. Numerical missing values are NaN;
/// categorical missing values are `None`.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numerical(Vec<f64>),
    Categorical {
        codes: Vec<Option<u32>>,
        vocab: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numerical(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numerical(values),
        }
    }

    pub fn categorical(name: impl Into<String>, codes: Vec<Option<u32>>, vocab: Vec<String>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical { codes, vocab },
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numerical(_) => ColumnKind::Numerical,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numerical(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn permute(&self, perm: &Permutation) -> Column {
        let data = match &self.data {
            ColumnData::Numerical(v) => ColumnData::Numerical(perm.apply(v)),
            ColumnData::Categorical { codes, vocab } => ColumnData::Categorical {
                codes: perm.apply(codes),
                vocab: vocab.clone(),
            },
        };
        Column {
            name: self.name.clone(),
            data,
        }
    }
}

/// Column-oriented node feature store.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    n_rows: usize,
    columns: Vec<Column>,
}

impl FeatureTable {
    pub fn new(n_rows: usize, columns: Vec<Column>) -> Result<Self> {
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::InvalidInput(format!(
                    "column `{}` has {} entries, expected {n_rows}",
                    c.name,
                    c.len()
                )));
            }
            if let ColumnData::Categorical { codes, vocab } = &c.data {
                if codes.iter().flatten().any(|&k| k as usize >= vocab.len()) {
                    return Err(Error::InvalidInput(format!(
                        "column `{}` has a code outside its vocabulary",
                        c.name
                    )));
                }
            }
        }
        let mut names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate column names".into()));
        }
        Ok(FeatureTable { n_rows, columns })
    }

    pub fn empty(n_rows: usize) -> Self {
        FeatureTable {
            n_rows,
            columns: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Reorders rows: row `i` moves to `perm.image(i)`.
    pub fn permute_rows(&self, perm: &Permutation) -> FeatureTable {
        FeatureTable {
            n_rows: self.n_rows,
            columns: self.columns.iter().map(|c| c.permute(perm)).collect(),
        }
    }

    /// Reorders columns: the output's column `j` is input column `order[j]`.
    pub fn select_columns(&self, order: &[usize]) -> FeatureTable {
        FeatureTable {
            n_rows: self.n_rows,
            columns: order.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Binary,
    Multiclass,
    Regression,
}

impl TaskKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, TaskKind::Regression)
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(TaskKind::Binary),
            "multiclass" => Ok(TaskKind::Multiclass),
            "regression" => Ok(TaskKind::Regression),
            other => Err(Error::InvalidInput(format!("unknown task kind `{other}`"))),
        }
    }
}

/// Per-node targets. Missing entries are `None` (classes) or NaN (values).
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Classes(Vec<Option<u32>>),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    kind: TaskKind,
    targets: Targets,
    class_names: Vec<String>,
}

impl TaskSpec {
    pub fn classification(kind: TaskKind, labels: Vec<Option<u32>>, class_names: Vec<String>) -> Result<Self> {
        if !kind.is_classification() {
            return Err(Error::InvalidInput("classification targets need a classification task".into()));
        }
        if kind == TaskKind::Binary && class_names.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "binary task needs exactly 2 classes, found {}",
                class_names.len()
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::InvalidInput("classification needs at least 2 classes".into()));
        }
        if labels.iter().flatten().any(|&c| c as usize >= class_names.len()) {
            return Err(Error::InvalidInput("class index out of range".into()));
        }
        Ok(TaskSpec {
            kind,
            targets: Targets::Classes(labels),
            class_names,
        })
    }

    pub fn regression(values: Vec<f64>) -> Self {
        TaskSpec {
            kind: TaskKind::Regression,
            targets: Targets::Values(values),
            class_names: Vec::new(),
        }
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        match &self.targets {
            Targets::Classes(v) => v.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class labels, if this is a classification task.
    pub fn labels(&self) -> Option<&[Option<u32>]> {
        match &self.targets {
            Targets::Classes(v) => Some(v),
            Targets::Values(_) => None,
        }
    }

    pub fn has_target(&self, node: usize) -> bool {
        match &self.targets {
            Targets::Classes(v) => v[node].is_some(),
            Targets::Values(v) => !v[node].is_nan(),
        }
    }

    /// Target of `node` as a real number (class index for classification).
    pub fn target_value(&self, node: usize) -> f64 {
        match &self.targets {
            Targets::Classes(v) => v[node].map_or(f64::NAN, |c| c as f64),
            Targets::Values(v) => v[node],
        }
    }

    pub fn permute(&self, perm: &Permutation) -> TaskSpec {
        let targets = match &self.targets {
            Targets::Classes(v) => Targets::Classes(perm.apply(v)),
            Targets::Values(v) => Targets::Values(perm.apply(v)),
        };
        TaskSpec {
            kind: self.kind,
            targets,
            class_names: self.class_names.clone(),
        }
    }
}

/// An attributed graph with a node-level prediction task.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub features: FeatureTable,
    pub task: TaskSpec,
}

impl Dataset {
    pub fn new(graph: Graph, features: FeatureTable, task: TaskSpec) -> Result<Self> {
        let n = graph.n_nodes();
        if features.n_rows() != n || task.len() != n {
            return Err(Error::InvalidInput(format!(
                "graph has {n} nodes but features have {} rows and targets {} entries",
                features.n_rows(),
                task.len()
            )));
        }
        Ok(Dataset { graph, features, task })
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn permute_nodes(&self, perm: &Permutation) -> Dataset {
        Dataset {
            graph: self.graph.permute(perm),
            features: self.features.permute_rows(perm),
            task: self.task.permute(perm),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_table_rejects_bad_lengths_and_codes() {
        assert!(FeatureTable::new(2, vec![Column::numerical("a", vec![1.0])]).is_err());
        let c = Column::categorical("c", vec![Some(2)], vec!["x".into(), "y".into()]);
        assert!(FeatureTable::new(1, vec![c]).is_err());
        let dup = vec![Column::numerical("a", vec![1.0]), Column::numerical("a", vec![2.0])];
        assert!(FeatureTable::new(1, dup).is_err());
    }

    #[test]
    fn binary_needs_two_classes() {
        let names = vec!["a".to_string(), "b".into(), "c".into()];
        assert!(TaskSpec::classification(TaskKind::Binary, vec![Some(0)], names.clone()).is_err());
        assert!(TaskSpec::classification(TaskKind::Multiclass, vec![Some(3)], names.clone()).is_err());
        assert!(TaskSpec::classification(TaskKind::Multiclass, vec![Some(2), None], names).is_ok());
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("categorical".parse::<ColumnKind>().unwrap(), ColumnKind::Categorical);
        assert!("ordinal".parse::<ColumnKind>().is_err());
        assert_eq!("regression".parse::<TaskKind>().unwrap(), TaskKind::Regression);
    }
}
