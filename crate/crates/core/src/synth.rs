//! Synthetic stochastic block model datasets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset, FeatureTable, TaskKind, TaskSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbmConfig {
    pub n_nodes: usize,
    pub n_blocks: usize,
    /// Edge probability inside a block.
    pub p_in: f64,
    /// Edge probability across blocks.
    pub p_out: f64,
    /// Standard normal feature columns, independent of the block.
    pub n_features: usize,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        SbmConfig {
            n_nodes: 1000,
            n_blocks: 2,
            p_in: 0.02,
            p_out: 0.002,
            n_features: 4,
            seed: 0,
        }
    }
}

/// Nodes are split into equal-sized blocks (the class labels) and wired by
/// block-dependent edge probabilities. Node features are pure noise, so the
/// class can only be recovered from the graph.
pub fn sbm_dataset(cfg: &SbmConfig) -> Result<Dataset> {
    let valid_p = |p: f64| (0.0..=1.0).contains(&p);
    if cfg.n_blocks < 2 || cfg.n_nodes < 3 * cfg.n_blocks || !valid_p(cfg.p_in) || !valid_p(cfg.p_out) {
        return Err(Error::InvalidInput("SBM needs ≥ 2 blocks, ≥ 3 nodes per block and probabilities in [0, 1]".into()));
    }
    let n = cfg.n_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut block: Vec<u32> = (0..n).map(|i| (i * cfg.n_blocks / n) as u32).collect();
    block.shuffle(&mut rng);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { cfg.p_in } else { cfg.p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, edges)?.0;
    let columns = (0..cfg.n_features)
        .map(|j| Column::numerical(format!("f{j}"), (0..n).map(|_| rng.sample(StandardNormal)).collect()))
        .collect();
    let kind = if cfg.n_blocks == 2 { TaskKind::Binary } else { TaskKind::Multiclass };
    let task = TaskSpec::classification(
        kind,
        block.into_iter().map(Some).collect(),
        (0..cfg.n_blocks).map(|b| format!("block{b}")).collect(),
    )?;
    Dataset::new(graph, FeatureTable::new(n, columns)?, task)
}
