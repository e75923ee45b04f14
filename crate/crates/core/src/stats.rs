use serde::{Deserialize, Serialize};

use crate::data::Dataset;

/// Summary statistics of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_features: usize,
    pub mean_degree: f64,
    /// Fraction of edges whose endpoints share a class; only edges with both
    /// endpoints labeled count. `None` for regression.
    pub edge_homophily: Option<f64>,
}

pub fn dataset_stats(dataset: &Dataset) -> DatasetStats {
    let g = &dataset.graph;
    let n = g.n_nodes();
    let mean_degree = if n == 0 { 0.0 } else { 2.0 * g.n_edges() as f64 / n as f64 };
    let edge_homophily = dataset.task.labels().map(|labels| {
        let (mut same, mut total) = (0usize, 0usize);
        for (u, v) in g.edges() {
            if let (Some(a), Some(b)) = (labels[u], labels[v]) {
                total += 1;
                same += usize::from(a == b);
            }
        }
        if total == 0 {
            0.0
        } else {
            same as f64 / total as f64
        }
    });
    DatasetStats {
        n_nodes: n,
        n_edges: g.n_edges(),
        n_features: dataset.features.n_columns(),
        mean_degree,
        edge_homophily,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureTable, TaskKind, TaskSpec};
    use crate::graph::Graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds(n: usize, edges: &[(usize, usize)], labels: Vec<u32>, k: usize) -> Dataset {
        let (g, _) = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let names = (0..k).map(|c| c.to_string()).collect();
        let kind = if k == 2 { TaskKind::Binary } else { TaskKind::Multiclass };
        let task = TaskSpec::classification(kind, labels.into_iter().map(Some).collect(), names).unwrap();
        Dataset::new(g, FeatureTable::empty(n), task).unwrap()
    }

    #[test]
    fn triangle_all_same_class() {
        let s = dataset_stats(&ds(3, &[(0, 1), (1, 2), (0, 2)], vec![0, 0, 0], 2));
        assert_eq!(s.edge_homophily, Some(1.0));
        assert_eq!(s.mean_degree, 2.0);
    }

    #[test]
    fn path_alternating_labels() {
        let s = dataset_stats(&ds(3, &[(0, 1), (1, 2)], vec![0, 1, 0], 2));
        assert_eq!(s.edge_homophily, Some(0.0));
    }

    #[test]
    fn random_graph_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let n = 20;
        let mut edges = Vec::new();
        let mut adj = vec![vec![false; n]; n];
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(0.25) {
                    edges.push((u, v));
                    adj[u][v] = true;
                    adj[v][u] = true;
                }
            }
        }
        let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let s = dataset_stats(&ds(n, &edges, labels.clone(), 3));
        // Oracle: scan the dense adjacency matrix.
        let (mut same, mut total, mut deg_sum) = (0, 0, 0);
        for u in 0..n {
            for v in 0..n {
                if adj[u][v] {
                    deg_sum += 1;
                    if u < v {
                        total += 1;
                        same += (labels[u] == labels[v]) as usize;
                    }
                }
            }
        }
        assert_eq!(s.n_edges, total);
        assert!((s.edge_homophily.unwrap() - same as f64 / total as f64).abs() < 1e-15);
        assert!((s.mean_degree - deg_sum as f64 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn regression_has_no_homophily() {
        let (g, _) = Graph::from_edges(2, [(0, 1)]).unwrap();
        let d = Dataset::new(g, FeatureTable::empty(2), TaskSpec::regression(vec![1.0, 2.0])).unwrap();
        assert_eq!(dataset_stats(&d).edge_homophily, None);
    }
}
