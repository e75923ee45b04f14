use ndarray::Array2;

use super::{PredictRequest, Prediction, Predictor, Standardizer, TrainLabels};
use crate::error::{Error, Result};
use crate::par;

/// k-nearest neighbors on z-scored features with Euclidean distance.
///
/// Classification returns neighbor class frequencies, regression the
/// neighbor mean. Equal distances are resolved in favor of the lower
/// training index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Knn {
    pub k: usize,
}

impl Default for Knn {
    fn default() -> Self {
        Knn { k: 15 }
    }
}

impl Knn {
    /// Indices of the `k` nearest training rows of every test row, nearest first.
    pub fn neighbors(&self, req: &PredictRequest) -> Result<Vec<Vec<usize>>> {
        req.validate()?;
        let n_train = req.n_train();
        if n_train == 0 {
            return Err(Error::InvalidInput("k-NN needs a non-empty training set".into()));
        }
        if self.k == 0 || self.k > n_train {
            return Err(Error::InvalidInput(format!("k = {} must lie in 1..={n_train}", self.k)));
        }
        let scaler = Standardizer::fit(&req.train_x);
        let train = scaler.transform(&req.train_x);
        let test = scaler.transform(&req.test_x);
        let k = self.k;
        Ok(par::map_range(test.nrows(), |t| {
            let q = test.row(t);
            let dist: Vec<f64> = train
                .rows()
                .into_iter()
                .map(|r| r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let mut idx: Vec<usize> = (0..n_train).collect();
            let cmp = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
            if k < n_train {
                idx.select_nth_unstable_by(k - 1, cmp);
                idx.truncate(k);
            }
            idx.sort_by(cmp);
            idx
        }))
    }
}

impl Predictor for Knn {
    fn name(&self) -> String {
        format!("knn(k={})", self.k)
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        let nbrs = self.neighbors(req)?;
        let k = self.k as f64;
        Ok(match &req.train_y {
            TrainLabels::Classes(labels) => {
                let mut p = Array2::zeros((nbrs.len(), req.n_classes));
                for (t, nb) in nbrs.iter().enumerate() {
                    for &j in nb {
                        p[[t, labels[j] as usize]] += 1.0;
                    }
                }
                p.mapv_inplace(|c| c / k);
                Prediction::Probabilities(p)
            }
            TrainLabels::Values(values) => {
                Prediction::Values(nbrs.iter().map(|nb| nb.iter().map(|&j| values[j]).sum::<f64>() / k).collect())
            }
        })
    }
}
