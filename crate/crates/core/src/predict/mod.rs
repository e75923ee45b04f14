//! Predictors over augmented tables: k-nearest neighbors, linear models,
//! the label-shuffling wrapper and the client for an external backbone.

pub mod bridge;
pub mod echo;
mod knn;
mod linear;
mod shuffle;

use ndarray::Array2;

use crate::data::TaskKind;
use crate::error::{Error, Result};

pub use bridge::{BridgeClient, BridgeLimits, BridgeMeta};
pub use knn::Knn;
pub use linear::{ridge_fit, Linear, RidgeModel};
pub use shuffle::{shuffle_permutations, LabelShuffle};

/// Training targets of a request.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainLabels {
    Classes(Vec<u32>),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictRequest {
    pub train_x: Array2<f64>,
    pub train_y: TrainLabels,
    pub test_x: Array2<f64>,
    pub task: TaskKind,
    /// Zero for regression.
    pub n_classes: usize,
}

impl PredictRequest {
    pub fn new(train_x: Array2<f64>, train_y: TrainLabels, test_x: Array2<f64>, task: TaskKind, n_classes: usize) -> Result<Self> {
        let req = PredictRequest {
            train_x,
            train_y,
            test_x,
            task,
            n_classes,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_x.ncols() != self.test_x.ncols() {
            return Err(Error::InvalidInput(format!(
                "train rows have {} features, test rows {}",
                self.train_x.ncols(),
                self.test_x.ncols()
            )));
        }
        let n_targets = match (&self.train_y, self.task.is_classification()) {
            (TrainLabels::Classes(c), true) => {
                if self.n_classes < 2 {
                    return Err(Error::InvalidInput("classification needs at least two classes".into()));
                }
                if let Some(bad) = c.iter().find(|&&c| c as usize >= self.n_classes) {
                    return Err(Error::InvalidInput(format!("class {bad} out of range for {} classes", self.n_classes)));
                }
                c.len()
            }
            (TrainLabels::Values(v), false) => v.len(),
            _ => return Err(Error::InvalidInput("targets do not match the task kind".into())),
        };
        if n_targets != self.train_x.nrows() {
            return Err(Error::InvalidInput(format!(
                "{} training rows but {n_targets} targets",
                self.train_x.nrows()
            )));
        }
        Ok(())
    }

    pub fn n_train(&self) -> usize {
        self.train_x.nrows()
    }

    pub fn n_test(&self) -> usize {
        self.test_x.nrows()
    }

    /// The same request with every training class `c` renamed to `perm[c]`.
    pub fn relabeled(&self, perm: &[usize]) -> PredictRequest {
        let train_y = match &self.train_y {
            TrainLabels::Classes(c) => TrainLabels::Classes(c.iter().map(|&c| perm[c as usize] as u32).collect()),
            TrainLabels::Values(v) => TrainLabels::Values(v.clone()),
        };
        PredictRequest { train_y, ..self.clone() }
    }

    /// Training rows reordered by `order`.
    pub fn reorder_train(&self, order: &[usize]) -> PredictRequest {
        let train_y = match &self.train_y {
            TrainLabels::Classes(c) => TrainLabels::Classes(order.iter().map(|&i| c[i]).collect()),
            TrainLabels::Values(v) => TrainLabels::Values(order.iter().map(|&i| v[i]).collect()),
        };
        PredictRequest {
            train_x: self.train_x.select(ndarray::Axis(0), order),
            train_y,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// `n_test × n_classes`, rows on the probability simplex.
    Probabilities(Array2<f64>),
    Values(Vec<f64>),
}

impl Prediction {
    pub fn len(&self) -> usize {
        match self {
            Prediction::Probabilities(p) => p.nrows(),
            Prediction::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the row count and, for probabilities, the simplex constraint within 1e-6.
    pub fn validate(&self, n_rows: usize, n_classes: usize) -> Result<()> {
        if self.len() != n_rows {
            return Err(Error::Numeric(format!("prediction has {} rows, expected {n_rows}", self.len())));
        }
        match self {
            Prediction::Probabilities(p) => {
                if p.ncols() != n_classes {
                    return Err(Error::Numeric(format!("prediction has {} classes, expected {n_classes}", p.ncols())));
                }
                for (i, row) in p.rows().into_iter().enumerate() {
                    let total: f64 = row.sum();
                    if row.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-6 {
                        return Err(Error::Numeric(format!("row {i} is not a probability vector")));
                    }
                }
            }
            Prediction::Values(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numeric("regression prediction is not finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Most probable class per row; the lowest index wins ties.
    pub fn classes(&self) -> Option<Vec<u32>> {
        match self {
            Prediction::Probabilities(p) => Some(
                p.rows()
                    .into_iter()
                    .map(|r| crate::metrics::argmax(r.as_slice().expect("contiguous")) as u32)
                    .collect(),
            ),
            Prediction::Values(_) => None,
        }
    }
}

pub trait Predictor: Send + Sync {
    fn name(&self) -> String;

    fn predict(&self, req: &PredictRequest) -> Result<Prediction>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn name(&self) -> String {
        (**self).name()
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        (**self).predict(req)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        (**self).predict(req)
    }
}

/// Column-wise z-scoring with training statistics. Missing values map to 0,
/// the training mean. Constant columns keep unit scale.
#[derive(Debug, Clone)]
pub(crate) struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Self {
        let (mean, scale) = x
            .columns()
            .into_iter()
            .map(|col| {
                let vals: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
                if vals.is_empty() {
                    return (0.0, 1.0);
                }
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64;
                let sd = var.sqrt();
                (m, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
            })
            .unzip();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = if v.is_nan() { 0.0 } else { (*v - m) / s };
            }
        }
        out
    }
}
