use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use super::{PredictRequest, Prediction, Predictor, Standardizer, TrainLabels};
use crate::error::{Error, Result};

/// Ridge regression for regression tasks, multinomial logistic regression
/// for classification. Features are z-scored on the training rows; the
/// intercept is never penalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub l2: f64,
    /// Gradient-descent step for the logistic model.
    pub lr: f64,
    pub epochs: usize,
}

impl Default for Linear {
    fn default() -> Self {
        Linear {
            l2: 1e-3,
            lr: 0.5,
            epochs: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub intercept: f64,
    pub coef: Vec<f64>,
}

impl RidgeModel {
    pub fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| self.intercept + r.iter().zip(&self.coef).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Minimizes `‖y − b − Xw‖² + l2‖w‖²` through the normal equations.
pub fn ridge_fit(x: &Array2<f64>, y: &[f64], l2: f64) -> Result<RidgeModel> {
    let (n, d) = x.dim();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidInput("ridge needs one target per training row".into()));
    }
    if !(l2 >= 0.0) {
        return Err(Error::InvalidInput("l2 penalty must be non-negative".into()));
    }
    let xm: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let ym = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - xm[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let mut gram = xc.transpose() * &xc;
    for j in 0..d {
        gram[(j, j)] += l2;
    }
    let rhs = xc.transpose() * yc;
    let scale = (0..d).map(|j| gram[(j, j)]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let chol = nalgebra::Cholesky::new(gram).filter(|c| {
        let l = c.l_dirty();
        (0..d).all(|j| l[(j, j)] * l[(j, j)] > 1e-12 * scale)
    });
    let Some(chol) = chol else {
        return Err(Error::Numeric(if l2 > 0.0 {
            "ridge normal matrix is not positive definite".into()
        } else {
            "normal matrix is singular; use a positive l2 penalty".into()
        }));
    };
    let w = chol.solve(&rhs);
    let intercept = ym - (0..d).map(|j| w[j] * xm[j]).sum::<f64>();
    Ok(RidgeModel {
        intercept,
        coef: w.iter().copied().collect(),
    })
}

/// Softmax probabilities of `x · w + b`, row by row.
fn softmax_scores(x: &Array2<f64>, w: &Array2<f64>, b: &[f64]) -> Array2<f64> {
    let mut s = x.dot(w);
    for mut row in s.rows_mut() {
        row.iter_mut().zip(b).for_each(|(v, bb)| *v += bb);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
    s
}

impl Linear {
    fn logistic(&self, x: &Array2<f64>, labels: &[u32], n_classes: usize, test: &Array2<f64>) -> Result<Array2<f64>> {
        let (n, d) = x.dim();
        if n == 0 {
            return Err(Error::InvalidInput("logistic regression needs training rows".into()));
        }
        let mut w = Array2::<f64>::zeros((d, n_classes));
        let mut b = vec![0.0; n_classes];
        let mut onehot = Array2::<f64>::zeros((n, n_classes));
        for (i, &c) in labels.iter().enumerate() {
            onehot[[i, c as usize]] = 1.0;
        }
        for _ in 0..self.epochs {
            let g = (softmax_scores(x, &w, &b) - &onehot) / n as f64;
            let gw = x.t().dot(&g) + &(&w * self.l2);
            for (bb, col) in b.iter_mut().zip(g.columns()) {
                *bb -= self.lr * col.sum();
            }
            w.scaled_add(-self.lr, &gw);
        }
        if w.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("logistic regression diverged".into()));
        }
        Ok(softmax_scores(test, &w, &b))
    }
}

impl Predictor for Linear {
    fn name(&self) -> String {
        "linear".into()
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        req.validate()?;
        let scaler = Standardizer::fit(&req.train_x);
        let train = scaler.transform(&req.train_x);
        let test = scaler.transform(&req.test_x);
        match &req.train_y {
            TrainLabels::Values(y) => Ok(Prediction::Values(ridge_fit(&train, y, self.l2)?.predict(&test))),
            TrainLabels::Classes(c) => Ok(Prediction::Probabilities(self.logistic(&train, c, req.n_classes, &test)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TaskKind;
    use crate::metrics::{accuracy, r2};
    use ndarray::Axis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_linear_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((15, 3), |_| rng.random_range(-2.0..2.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| 1.5 - 2.0 * r[0] + 0.5 * r[2]).collect();
        let req = PredictRequest::new(x.clone(), TrainLabels::Values(y.clone()), x, TaskKind::Regression, 0).unwrap();
        let lin = Linear { l2: 0.0, ..Default::default() };
        let Prediction::Values(p) = lin.predict(&req).unwrap() else { unreachable!() };
        assert!((r2(&p, &y).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn singular_without_penalty() {
        let x = Array2::from_shape_fn((6, 2), |(i, _)| i as f64);
        let y = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(ridge_fit(&x, &y, 0.0), Err(Error::Numeric(_))));
        assert!(ridge_fit(&x, &y, 0.1).is_ok());
    }

    #[test]
    fn ridge_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((20, 5), |_| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l2 = 0.3;
        let m = ridge_fit(&x, &y, l2).unwrap();
        // Augmented design [1 | X] with the intercept left unpenalized.
        let a = DMatrix::from_fn(20, 6, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
        let mut lhs = a.transpose() * &a;
        for j in 1..6 {
            lhs[(j, j)] += l2;
        }
        let rhs = a.transpose() * DVector::from_vec(y.clone());
        let beta = lhs.lu().solve(&rhs).unwrap();
        assert!((beta[0] - m.intercept).abs() < 1e-6);
        for j in 0..5 {
            assert!((beta[j + 1] - m.coef[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn separable_two_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((40, 2), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<u32> = x.rows().into_iter().map(|r| u32::from(r[0] + 0.5 * r[1] > 0.0)).collect();
        let req = PredictRequest::new(x.clone(), TrainLabels::Classes(labels.clone()), x, TaskKind::Binary, 2).unwrap();
        let lin = Linear {
            l2: 0.0,
            lr: 1.0,
            epochs: 3000,
        };
        let p = lin.predict(&req).unwrap();
        p.validate(40, 2).unwrap();
        assert_eq!(accuracy(&p.classes().unwrap(), &labels).unwrap(), 1.0);
    }

    #[test]
    fn invariant_to_train_row_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Array2::from_shape_fn((30, 3), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<u32> = (0..30).map(|_| rng.random_range(0..3)).collect();
        let req = PredictRequest::new(x.clone(), TrainLabels::Classes(labels), x.select(Axis(0), &[0, 5]), TaskKind::Multiclass, 3).unwrap();
        let order: Vec<usize> = (0..30).rev().collect();
        let Prediction::Probabilities(a) = Linear::default().predict(&req).unwrap() else { unreachable!() };
        let Prediction::Probabilities(b) = Linear::default().predict(&req.reorder_train(&order)).unwrap() else { unreachable!() };
        assert!((&a - &b).iter().all(|d| d.abs() < 1e-9));
    }
}
