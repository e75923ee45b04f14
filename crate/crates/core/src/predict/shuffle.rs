use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PredictRequest, Prediction, Predictor};
use crate::error::{Error, Result};
use crate::par;

/// Averages an inner classifier over relabelings of the classes.
///
/// For each permutation `π`, the inner predictor sees class `c` renamed to
/// `π(c)`; its output column `π(c)` is mapped back to class `c`. When all
/// `n_classes!` permutations fit within `n_shuffles` they are enumerated,
/// which makes the result exactly equivariant to class relabeling.
#[derive(Debug, Clone)]
pub struct LabelShuffle<P> {
    pub inner: P,
    pub n_shuffles: usize,
    pub seed: u64,
}

impl<P> LabelShuffle<P> {
    pub fn new(inner: P, n_shuffles: usize, seed: u64) -> Self {
        LabelShuffle { inner, n_shuffles, seed }
    }
}

fn factorial_at_most(n: usize, cap: usize) -> bool {
    let mut f = 1usize;
    for k in 2..=n {
        f = f.saturating_mul(k);
        if f > cap {
            return false;
        }
    }
    true
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Class permutations used by [`LabelShuffle`]: all of them in
/// lexicographic order when `n_classes! <= n_shuffles`, otherwise
/// `n_shuffles` seeded random draws.
pub fn shuffle_permutations(n_classes: usize, n_shuffles: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n_classes).collect();
    if factorial_at_most(n_classes, n_shuffles) {
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        all
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_shuffles)
            .map(|_| {
                p.shuffle(&mut rng);
                p.clone()
            })
            .collect()
    }
}

impl<P: Predictor> Predictor for LabelShuffle<P> {
    fn name(&self) -> String {
        format!("{}+shuffle({})", self.inner.name(), self.n_shuffles)
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        if !req.task.is_classification() {
            return Err(Error::InvalidInput("label shuffling applies to classification only".into()));
        }
        if self.n_shuffles == 0 {
            return Err(Error::InvalidInput("at least one label shuffle is required".into()));
        }
        req.validate()?;
        let perms = shuffle_permutations(req.n_classes, self.n_shuffles, self.seed);
        let members = par::map_range(perms.len(), |m| -> Result<Array2<f64>> {
            let perm = &perms[m];
            match self.inner.predict(&req.relabeled(perm))? {
                Prediction::Probabilities(q) => {
                    Ok(Array2::from_shape_fn((q.nrows(), req.n_classes), |(i, c)| q[[i, perm[c]]]))
                }
                Prediction::Values(_) => Err(Error::InvalidInput("inner predictor returned regression output".into())),
            }
        });
        let mut total = Array2::zeros((req.n_test(), req.n_classes));
        for m in members {
            total += &m?;
        }
        total /= perms.len() as f64;
        Ok(Prediction::Probabilities(total))
    }
}
