//! Undirected graphs in compressed sparse row form.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Immutable undirected graph stored as symmetric CSR adjacency.
///
/// Neighbor lists are sorted ascending, contain no duplicates and no
/// self-loops, and every edge `(u, v)` is stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

/// What [`Graph::from_edges`] had to clean up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list.
    ///
    /// Edges are symmetrized, duplicate entries (including both orientations
    /// of the same edge) are merged and self-loops are dropped.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<(Self, BuildReport)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut report = BuildReport::default();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        let mut n_input = 0usize;
        for (u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) references a node outside 0..{n_nodes}"
                )));
            }
            if u == v {
                report.self_loops_dropped += 1;
                continue;
            }
            n_input += 1;
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut row_offsets = Vec::with_capacity(n_nodes + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(2 * n_input);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            col_indices.extend_from_slice(list);
            row_offsets.push(col_indices.len());
        }
        let g = Graph {
            n_nodes,
            row_offsets,
            col_indices,
        };
        report.duplicates_merged = n_input - g.n_edges();
        Ok((g, report))
    }

    /// Wraps raw CSR arrays after checking every structural invariant.
    pub fn from_csr(n_nodes: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("invalid CSR graph: {m}")));
        if row_offsets.len() != n_nodes + 1 || row_offsets[0] != 0 {
            return bad("row_offsets must have length n+1 and start at 0");
        }
        if row_offsets[n_nodes] != col_indices.len() {
            return bad("row_offsets[n] must equal the number of stored entries");
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("row_offsets must be non-decreasing");
        }
        let g = Graph {
            n_nodes,
            row_offsets,
            col_indices,
        };
        for u in 0..n_nodes {
            let nb = g.neighbors(u);
            if nb.iter().any(|&v| v >= n_nodes) {
                return bad("neighbor index out of range");
            }
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return bad("neighbor lists must be strictly ascending");
            }
            if nb.binary_search(&u).is_ok() {
                return bad("self-loops are not allowed");
            }
            if nb.iter().any(|&v| g.neighbors(v).binary_search(&u).is_err()) {
                return bad("adjacency is not symmetric");
            }
        }
        Ok(g)
    }

    /// Graph with `n_nodes` nodes and no edges.
    pub fn empty(n_nodes: usize) -> Self {
        Graph {
            n_nodes,
            row_offsets: vec![0; n_nodes + 1],
            col_indices: Vec::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[u]..self.row_offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Connected-component label per node, numbered in order of first node.
    pub fn components(&self) -> (Vec<usize>, usize) {
        const UNSEEN: usize = usize::MAX;
        let mut label = vec![UNSEEN; self.n_nodes];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n_nodes {
            if label[s] != UNSEEN {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if label[v] == UNSEEN {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Relabels nodes so that old node `i` becomes `perm.image(i)`.
    pub fn permute(&self, perm: &Permutation) -> Graph {
        assert_eq!(perm.len(), self.n_nodes, "permutation length mismatch");
        let edges = self.edges().map(|(u, v)| (perm.image(u), perm.image(v)));
        Graph::from_edges(self.n_nodes, edges).expect("permuted edges stay in range").0
    }
}

/// A permutation of `0..n`, stored as the image of each index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn from_images(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &j in &image {
            if j >= image.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        Ok(Permutation { image })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Permutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    /// Moves entry `i` of `xs` to position `image(i)`.
    pub fn apply<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        assert_eq!(xs.len(), self.image.len());
        let mut out = xs.to_vec();
        for (i, x) in xs.iter().enumerate() {
            out[self.image[i]] = x.clone();
        }
        out
    }

    /// Row version of [`Permutation::apply`] for a row-major matrix.
    pub fn apply_rows(&self, m: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
        assert_eq!(m.nrows(), self.image.len());
        let mut out = m.clone();
        for (i, row) in m.outer_iter().enumerate() {
            out.row_mut(self.image[i]).assign(&row);
        }
        out
    }
}
