//! Eigenvectors of the symmetric normalized Laplacian
//! `L = I - D^{-1/2} A D^{-1/2}`.
//!
//! Isolated nodes are left out of the eigenproblem and receive zeros. The
//! null space of `L` on the remaining nodes is spanned by one vector per
//! connected component, `sqrt(deg)` restricted to that component; these
//! trivial eigenvectors are deflated exactly rather than detected
//! numerically, so "the first K" always means the K smallest eigenpairs of
//! the complement, counted with multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use super::lanczos::{largest_eigenpairs, LanczosOptions};
use super::StructuralConfig;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

/// Eigenvalues in ascending order with the matching `n × K` eigenvector matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// `y = L x`, with the convention `L_ii = 1` on isolated nodes.
pub fn normalized_laplacian_apply(graph: &Graph, x: &[f64], y: &mut [f64]) {
    let isd = inv_sqrt_degrees(graph);
    par::fill(y, |i| {
        let s: f64 = graph.neighbors(i).iter().map(|&j| isd[j] * x[j]).sum();
        x[i] - isd[i] * s
    });
}

fn inv_sqrt_degrees(graph: &Graph) -> Vec<f64> {
    (0..graph.n_nodes())
        .map(|i| match graph.degree(i) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect()
}

/// The non-isolated part of a graph in compact numbering.
struct Active {
    nodes: Vec<usize>,
    pos: Vec<usize>,
    isd: Vec<f64>,
    null_basis: Vec<Vec<f64>>,
}

impl Active {
    fn new(graph: &Graph) -> Self {
        let n = graph.n_nodes();
        let nodes: Vec<usize> = (0..n).filter(|&i| graph.degree(i) > 0).collect();
        let mut pos = vec![usize::MAX; n];
        for (a, &i) in nodes.iter().enumerate() {
            pos[i] = a;
        }
        let isd: Vec<f64> = nodes.iter().map(|&i| 1.0 / (graph.degree(i) as f64).sqrt()).collect();
        let (label, _) = graph.components();
        let mut comp_index = std::collections::BTreeMap::new();
        let mut null_basis: Vec<Vec<f64>> = Vec::new();
        for (a, &i) in nodes.iter().enumerate() {
            let c = *comp_index.entry(label[i]).or_insert_with(|| {
                null_basis.push(vec![0.0; nodes.len()]);
                null_basis.len() - 1
            });
            null_basis[c][a] = (graph.degree(i) as f64).sqrt();
        }
        for z in &mut null_basis {
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            z.iter_mut().for_each(|v| *v /= norm);
        }
        Active {
            nodes,
            pos,
            isd,
            null_basis,
        }
    }

    fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, graph: &Graph, x: &[f64], y: &mut [f64]) {
        par::fill(y, |a| {
            let i = self.nodes[a];
            let s: f64 = graph
                .neighbors(i)
                .iter()
                .map(|&j| {
                    let b = self.pos[j];
                    self.isd[b] * x[b]
                })
                .sum();
            x[a] - self.isd[a] * s
        });
    }
}

/// Multiplier pushing the trivial eigenvectors above the spectrum of `L`, which lies in [0, 2].
const NULL_SHIFT: f64 = 3.0;

fn dense_smallest(graph: &Graph, act: &Active, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = act.dim();
    let mut l = DMatrix::<f64>::identity(m, m);
    for (a, &i) in act.nodes.iter().enumerate() {
        for &j in graph.neighbors(i) {
            let b = act.pos[j];
            l[(a, b)] -= act.isd[a] * act.isd[b];
        }
    }
    for z in &act.null_basis {
        let support: Vec<usize> = (0..m).filter(|&a| z[a] != 0.0).collect();
        for &a in &support {
            for &b in &support {
                l[(a, b)] += NULL_SHIFT * z[a] * z[b];
            }
        }
    }
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k)
        .map(|c| (eig.eigenvalues[c], eig.eigenvectors.column(c).iter().copied().collect()))
        .unzip()
}

fn lanczos_smallest(graph: &Graph, act: &Active, k: usize, cfg: &StructuralConfig) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    // Largest eigenpairs of 2I - L are the smallest of L.
    let op = |x: &[f64], y: &mut [f64]| {
        act.apply(graph, x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = 2.0 * xi - *yi;
        }
    };
    let opts = LanczosOptions {
        tol: cfg.eig_tol * 0.1,
        seed: cfg.lanczos_seed,
        max_restarts: 100 * k + 100,
        basis_size: 60,
    };
    let (thetas, vecs) = largest_eigenpairs(act.dim(), k, op, &act.null_basis, opts)?;
    Ok((thetas.into_iter().map(|t| 2.0 - t).collect(), vecs))
}

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `K = cfg.n_eigenvectors` smallest nontrivial Laplacian eigenpairs.
pub fn laplacian_eigenpairs(graph: &Graph, cfg: &StructuralConfig) -> Result<Eigenpairs> {
    cfg.validate()?;
    let n = graph.n_nodes();
    let k = cfg.n_eigenvectors;
    if k == 0 {
        return Ok(Eigenpairs {
            values: Vec::new(),
            vectors: Array2::zeros((n, 0)),
        });
    }
    if k >= n {
        return Err(Error::InvalidInput(format!(
            "number of eigenvectors ({k}) must be smaller than the number of nodes ({n})"
        )));
    }
    let act = Active::new(graph);
    let available = act.dim() - act.null_basis.len();
    if k > available {
        return Err(Error::NotEnoughEigenpairs { requested: k, available });
    }
    let (values, compact) = if act.dim() <= cfg.dense_limit {
        dense_smallest(graph, &act, k)
    } else {
        lanczos_smallest(graph, &act, k, cfg)?
    };

    let mut vectors = Array2::zeros((n, k));
    let mut full = vec![0.0; n];
    let mut lv = vec![0.0; n];
    for (c, mut v) in compact.into_iter().enumerate() {
        fix_sign(&mut v);
        full.iter_mut().for_each(|x| *x = 0.0);
        for (a, &i) in act.nodes.iter().enumerate() {
            full[i] = v[a];
        }
        normalized_laplacian_apply(graph, &full, &mut lv);
        let residual = lv.iter().zip(&full).map(|(a, b)| (a - values[c] * b).powi(2)).sum::<f64>().sqrt();
        if !(residual < cfg.eig_tol) {
            return Err(Error::Numeric(format!(
                "Laplacian eigenvector {} has residual {residual:e} above tolerance {:e}",
                c + 1,
                cfg.eig_tol
            )));
        }
        vectors.column_mut(c).assign(&ndarray::ArrayView1::from(&full));
    }
    Ok(Eigenpairs { values, vectors })
}

/// Eigenvector block of [`laplacian_eigenpairs`].
pub fn laplacian_eigenvectors(graph: &Graph, cfg: &StructuralConfig) -> Result<Array2<f64>> {
    laplacian_eigenpairs(graph, cfg).map(|e| e.vectors)
}
