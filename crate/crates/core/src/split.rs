//! Train/validation/test node splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Disjoint node index sets for training, validation and testing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl Split {
    /// Checks disjointness, range and non-emptiness.
    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        let mut seen = vec![false; n_nodes];
        for (name, part) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            if part.is_empty() {
                return Err(Error::InvalidInput(format!("{name} split is empty")));
            }
            for &i in part {
                if i >= n_nodes {
                    return Err(Error::InvalidInput(format!("{name} split contains node {i} >= {n_nodes}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidInput(format!("node {i} appears in more than one split part")));
                }
            }
        }
        Ok(())
    }
}

/// Fractions of labeled nodes assigned to each part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.1,
            val: 0.1,
            test: 0.8,
        }
    }
}

impl SplitRatios {
    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    fn validate(&self) -> Result<()> {
        let r = self.as_array();
        if r.iter().any(|&x| !(x > 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "split ratios must be positive and sum to 1, got {r:?}"
            )));
        }
        Ok(())
    }
}

/// Part sizes for `n` items: floors of the exact shares, then the remainder
/// handed out one at a time in train, val, test order.
fn part_sizes(n: usize, ratios: &SplitRatios) -> [usize; 3] {
    let r = ratios.as_array();
    let mut sizes = r.map(|x| (x * n as f64 + 1e-9).floor() as usize);
    let mut left = n - sizes.iter().sum::<usize>();
    let mut k = 0;
    while left > 0 {
        sizes[k % 3] += 1;
        left -= 1;
        k += 1;
    }
    sizes
}

fn slice_into(order: &[usize], sizes: [usize; 3], out: &mut Split) {
    let (a, rest) = order.split_at(sizes[0]);
    let (b, c) = rest.split_at(sizes[1]);
    out.train.extend_from_slice(a);
    out.val.extend_from_slice(b);
    out.test.extend_from_slice(c);
}

/// Random split over the nodes that carry a target.
///
/// Stratified splits shuffle each class separately and slice it
/// contiguously, so per-class proportions are preserved to within one node
/// per class per part.
pub fn make_split(dataset: &Dataset, ratios: SplitRatios, stratified: bool, seed: u64) -> Result<Split> {
    ratios.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed,
    };
    let task = &dataset.task;
    if stratified {
        let labels = task
            .labels()
            .ok_or_else(|| Error::InvalidInput("stratified split requested for a regression task".into()))?;
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); task.n_classes()];
        for (i, l) in labels.iter().enumerate() {
            if let Some(c) = l {
                by_class[*c as usize].push(i);
            }
        }
        for (c, nodes) in by_class.iter_mut().enumerate() {
            if nodes.is_empty() {
                continue;
            }
            if nodes.len() < 3 {
                return Err(Error::InvalidInput(format!(
                    "class `{}` has {} labeled nodes, fewer than the 3 split parts",
                    task.class_names()[c],
                    nodes.len()
                )));
            }
            nodes.shuffle(&mut rng);
            slice_into(nodes, part_sizes(nodes.len(), &ratios), &mut split);
        }
    } else {
        let mut nodes: Vec<usize> = (0..dataset.n_nodes()).filter(|&i| task.has_target(i)).collect();
        nodes.shuffle(&mut rng);
        slice_into(&nodes, part_sizes(nodes.len(), &ratios), &mut split);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    split.validate(dataset.n_nodes())?;
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureTable, TaskKind, TaskSpec};
    use crate::graph::Graph;

    fn dataset(labels: Vec<Option<u32>>, n_classes: usize) -> Dataset {
        let n = labels.len();
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        let kind = if n_classes == 2 { TaskKind::Binary } else { TaskKind::Multiclass };
        Dataset::new(
            Graph::empty(n),
            FeatureTable::empty(n),
            TaskSpec::classification(kind, labels, names).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn exact_fractions() {
        let d = Dataset::new(Graph::empty(100), FeatureTable::empty(100), TaskSpec::regression(vec![0.0; 100])).unwrap();
        let s = make_split(&d, SplitRatios::default(), false, 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (10, 10, 80));
    }

    #[test]
    fn stratified_balanced_classes() {
        let d = dataset((0..100).map(|i| Some((i % 2) as u32)).collect(), 2);
        let s = make_split(&d, SplitRatios::default(), true, 3).unwrap();
        let count = |part: &[usize], c: u32| part.iter().filter(|&&i| i % 2 == c as usize).count();
        assert_eq!((count(&s.train, 0), count(&s.train, 1)), (5, 5));
        assert_eq!(s.test.len(), 80);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = dataset((0..57).map(|i| Some((i % 3) as u32)).collect(), 3);
        let a = make_split(&d, SplitRatios::default(), true, 11).unwrap();
        let b = make_split(&d, SplitRatios::default(), true, 11).unwrap();
        let c = make_split(&d, SplitRatios::default(), true, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_proportions_within_one_node() {
        let labels: Vec<Option<u32>> = (0..97).map(|i| Some(if i < 19 { 0 } else if i < 60 { 1 } else { 2 })).collect();
        let d = dataset(labels.clone(), 3);
        let r = SplitRatios::default();
        let s = make_split(&d, r, true, 5).unwrap();
        for c in 0..3u32 {
            let n_c = labels.iter().filter(|l| **l == Some(c)).count() as f64;
            for (part, frac) in [(&s.train, r.train), (&s.val, r.val), (&s.test, r.test)] {
                let got = part.iter().filter(|&&i| labels[i] == Some(c)).count() as f64;
                assert!((got - frac * n_c).abs() <= 1.0, "class {c}: {got} vs {}", frac * n_c);
            }
        }
    }

    #[test]
    fn unlabeled_nodes_are_left_out() {
        let mut labels: Vec<Option<u32>> = (0..40).map(|i| Some((i % 2) as u32)).collect();
        labels[3] = None;
        let d = dataset(labels, 2);
        let s = make_split(&d, SplitRatios::default(), true, 0).unwrap();
        assert!(!s.train.contains(&3) && !s.val.contains(&3) && !s.test.contains(&3));
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), 39);
    }

    #[test]
    fn error_paths() {
        let d = Dataset::new(Graph::empty(10), FeatureTable::empty(10), TaskSpec::regression(vec![0.0; 10])).unwrap();
        assert!(make_split(&d, SplitRatios::default(), true, 0).is_err());
        let bad = SplitRatios { train: 0.5, val: 0.5, test: 0.5 };
        assert!(make_split(&d, bad, false, 0).is_err());
        let tiny = dataset(vec![Some(0), Some(0), Some(0), Some(0), Some(1), Some(1)], 2);
        let err = make_split(&tiny, SplitRatios::default(), true, 0).unwrap_err();
        assert!(err.to_string().contains("fewer than"), "{err}");
    }
}
