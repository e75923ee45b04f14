//! Neighborhood feature aggregation: per-node statistics of the features of
//! its neighbors.
//!
//! Numerical columns yield `mean`, `max` and `min` over the non-missing
//! neighbor values. Categorical columns yield one frequency column per
//! category: the share of non-missing neighbors holding that category.
//! Nodes without any non-missing neighbor value get NaN in every output
//! column of that group.
//!
//! Neighbor values are sorted before summation, so a node's mean does not
//! depend on how its neighbors happen to be numbered.

use ndarray::Array2;

use crate::data::{ColumnData, FeatureTable};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NfaStat {
    Mean,
    Max,
    Min,
    /// Neighbor frequency of one category; denominator is the number of
    /// neighbors with a non-missing value.
    CatFreq(String),
}

impl std::fmt::Display for NfaStat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NfaStat::Mean => f.write_str("mean"),
            NfaStat::Max => f.write_str("max"),
            NfaStat::Min => f.write_str("min"),
            NfaStat::CatFreq(c) => write!(f, "cat_freq:{c}"),
        }
    }
}

/// Where an output column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfaProvenance {
    pub source: String,
    pub stat: NfaStat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfaTable {
    pub columns: Vec<Vec<f64>>,
    pub provenance: Vec<NfaProvenance>,
}

impl NfaTable {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// `source.stat` for each output column.
    pub fn column_names(&self) -> Vec<String> {
        self.provenance.iter().map(|p| format!("{}.{}", p.source, p.stat)).collect()
    }

    pub fn to_matrix(&self, n_rows: usize) -> Array2<f64> {
        Array2::from_shape_fn((n_rows, self.columns.len()), |(i, j)| self.columns[j][i])
    }
}

/// `(mean, max, min)` of the non-missing neighbor values of every node.
pub fn nfa_numerical(graph: &Graph, values: &[f64]) -> [Vec<f64>; 3] {
    assert_eq!(values.len(), graph.n_nodes(), "column length must equal node count");
    let stats = par::map_range(graph.n_nodes(), |i| {
        let mut nb: Vec<f64> = graph
            .neighbors(i)
            .iter()
            .map(|&j| values[j])
            .filter(|v| !v.is_nan())
            .collect();
        if nb.is_empty() {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        nb.sort_by(f64::total_cmp);
        let mean = par::pairwise_sum(&nb) / nb.len() as f64;
        (mean, nb[nb.len() - 1], nb[0])
    });
    let mut out = [Vec::with_capacity(stats.len()), Vec::with_capacity(stats.len()), Vec::with_capacity(stats.len())];
    for (mean, max, min) in stats {
        out[0].push(mean);
        out[1].push(max);
        out[2].push(min);
    }
    out
}

/// One frequency column per category, in vocabulary order.
pub fn nfa_categorical(graph: &Graph, codes: &[Option<u32>], vocab_size: usize) -> Vec<Vec<f64>> {
    assert_eq!(codes.len(), graph.n_nodes(), "column length must equal node count");
    assert!(vocab_size >= 1, "vocabulary must be non-empty");
    let rows = par::map_range(graph.n_nodes(), |i| {
        let mut counts = vec![0usize; vocab_size];
        let mut total = 0usize;
        for &j in graph.neighbors(i) {
            if let Some(c) = codes[j] {
                counts[c as usize] += 1;
                total += 1;
            }
        }
        if total == 0 {
            vec![f64::NAN; vocab_size]
        } else {
            counts.into_iter().map(|c| c as f64 / total as f64).collect()
        }
    });
    (0..vocab_size).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
}

/// Aggregates every feature column in table order.
pub fn compute_nfa(graph: &Graph, features: &FeatureTable) -> Result<NfaTable> {
    if features.n_rows() != graph.n_nodes() {
        return Err(Error::InvalidInput(format!(
            "feature table has {} rows but the graph has {} nodes",
            features.n_rows(),
            graph.n_nodes()
        )));
    }
    let mut table = NfaTable {
        columns: Vec::new(),
        provenance: Vec::new(),
    };
    for col in features.columns() {
        match &col.data {
            ColumnData::Numerical(values) => {
                let [mean, max, min] = nfa_numerical(graph, values);
                for (stat, values) in [(NfaStat::Mean, mean), (NfaStat::Max, max), (NfaStat::Min, min)] {
                    table.columns.push(values);
                    table.provenance.push(NfaProvenance {
                        source: col.name.clone(),
                        stat,
                    });
                }
            }
            ColumnData::Categorical { codes, vocab } => {
                if vocab.is_empty() {
                    return Err(Error::InvalidInput(format!("categorical column `{}` has an empty vocabulary", col.name)));
                }
                for (cat, values) in vocab.iter().zip(nfa_categorical(graph, codes, vocab.len())) {
                    table.columns.push(values);
                    table.provenance.push(NfaProvenance {
                        source: col.name.clone(),
                        stat: NfaStat::CatFreq(cat.clone()),
                    });
                }
            }
        }
    }
    Ok(table)
}
