//! Evaluation metrics: average precision (binary), accuracy (multiclass)
//! and the coefficient of determination (regression).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    AveragePrecision,
    Accuracy,
    R2,
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricName::AveragePrecision => "average_precision",
            MetricName::Accuracy => "accuracy",
            MetricName::R2 => "r2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub name: MetricName,
    pub value: f64,
    pub n_eval: usize,
}

/// Average precision of `scores` against binary `labels`.
///
/// Nodes are ranked by descending score. Each positive contributes the
/// precision at its rank; tied scores form one group, and every positive in
/// a group gets the precision measured at the end of that group. With all
/// scores equal this gives exactly `p / n`.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("scores contain NaN".into()));
    }
    let total_pos = labels.iter().filter(|&&y| y).count();
    if total_pos == 0 {
        return Err(Error::InvalidInput("average precision needs at least one positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ap = 0.0;
    let (mut seen, mut seen_pos) = (0usize, 0usize);
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        let mut group_pos = 0;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            group_pos += usize::from(labels[order[end]]);
            end += 1;
        }
        seen += end - start;
        seen_pos += group_pos;
        ap += group_pos as f64 * (seen_pos as f64 / seen as f64);
        start = end;
    }
    Ok(ap / total_pos as f64)
}

pub fn accuracy(pred: &[u32], labels: &[u32]) -> Result<f64> {
    if pred.len() != labels.len() {
        return Err(Error::InvalidInput("predictions and labels differ in length".into()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("accuracy of an empty set".into()));
    }
    let correct = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// `1 - SS_res / SS_tot`, with `SS_tot` taken about the target mean.
pub fn r2(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::InvalidInput("predictions and targets differ in length".into()));
    }
    if target.len() < 2 {
        return Err(Error::InvalidInput("R² needs at least two targets".into()));
    }
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::Numeric("targets have zero variance".into()));
    }
    let ss_res: f64 = pred.iter().zip(target).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}
