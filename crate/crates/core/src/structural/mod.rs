//! Classic structure-based node features: degree, PageRank and Laplacian
//! eigenvector embeddings.

mod lanczos;
mod spectral;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

pub(crate) use spectral::fix_sign;
pub use spectral::{laplacian_eigenpairs, laplacian_eigenvectors, normalized_laplacian_apply, Eigenpairs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructuralConfig {
    pub pagerank_damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
    /// Number of Laplacian eigenvectors; 0 disables the embedding.
    pub n_eigenvectors: usize,
    pub eig_tol: f64,
    /// Largest number of non-isolated nodes handled by the dense eigensolver;
    /// bigger graphs use Lanczos.
    pub dense_limit: usize,
    /// Seed for the Lanczos start vectors.
    pub lanczos_seed: u64,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        StructuralConfig {
            pagerank_damping: 0.85,
            pagerank_tol: 1e-9,
            pagerank_max_iter: 1000,
            n_eigenvectors: 8,
            eig_tol: 1e-8,
            dense_limit: 2000,
            lanczos_seed: 0,
        }
    }
}

impl StructuralConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pagerank_damping > 0.0 && self.pagerank_damping < 1.0) {
            return Err(Error::InvalidInput("pagerank damping must lie in (0, 1)".into()));
        }
        if !(self.pagerank_tol > 0.0) || !(self.eig_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Degree, PageRank and Laplacian eigenvector columns for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralFeatures {
    pub degree: Vec<f64>,
    pub pagerank: Vec<f64>,
    pub lap_eigs: Array2<f64>,
}

impl StructuralFeatures {
    pub fn width(&self) -> usize {
        2 + self.lap_eigs.ncols()
    }

    /// Column names in block order: degree, pagerank, eig_1..eig_K.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["degree".to_owned(), "pagerank".to_owned()];
        names.extend((1..=self.lap_eigs.ncols()).map(|k| format!("eig_{k}")));
        names
    }

    /// The block as an `n × (2 + K)` matrix.
    pub fn to_matrix(&self) -> Array2<f64> {
        let n = self.degree.len();
        let k = self.lap_eigs.ncols();
        Array2::from_shape_fn((n, 2 + k), |(i, j)| match j {
            0 => self.degree[i],
            1 => self.pagerank[i],
            _ => self.lap_eigs[[i, j - 2]],
        })
    }
}

pub fn degrees(graph: &Graph) -> Vec<f64> {
    par::map_range(graph.n_nodes(), |i| graph.degree(i) as f64)
}

/// PageRank by power iteration on the row-normalized symmetric adjacency.
///
/// Dangling (isolated) nodes spread their mass uniformly. Iteration stops
/// once the L1 change between successive iterates drops below
/// `cfg.pagerank_tol`. All sums use exact fixed-point accumulation, so
/// renumbering the nodes permutes the result without changing any bits.
pub fn pagerank(graph: &Graph, cfg: &StructuralConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = graph.n_nodes();
    if n == 0 {
        return Ok(Vec::new());
    }
    let d = cfg.pagerank_damping;
    let nf = n as f64;
    let inv_deg: Vec<f64> = par::map_range(n, |j| match graph.degree(j) {
        0 => 0.0,
        k => 1.0 / k as f64,
    });
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.pagerank_max_iter {
        let dangling = par::exact_sum_range(n, |j| if inv_deg[j] == 0.0 { x[j] } else { 0.0 });
        let base = (1.0 - d) / nf + d * dangling / nf;
        par::fill(&mut next, |i| {
            let mut pulled = par::FixedSum::default();
            for &j in graph.neighbors(i) {
                pulled.add(x[j] * inv_deg[j]);
            }
            base + d * pulled.value()
        });
        residual = par::exact_sum_range(n, |i| (next[i] - x[i]).abs());
        std::mem::swap(&mut x, &mut next);
        if residual < cfg.pagerank_tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.pagerank_max_iter,
        residual,
    })
}

/// All structural columns in the fixed order degree, pagerank, eig_1..eig_K.
pub fn structural_features(graph: &Graph, cfg: &StructuralConfig) -> Result<StructuralFeatures> {
    Ok(StructuralFeatures {
        degree: degrees(graph),
        pagerank: pagerank(graph, cfg)?,
        lap_eigs: laplacian_eigenvectors(graph, cfg)?,
    })
}
