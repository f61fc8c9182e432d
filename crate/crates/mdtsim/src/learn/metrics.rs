//! Confusion-matrix arithmetic and interpolated quantiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary classification metrics. `positive_error_rate` is the fraction of
/// true positives predicted negative (miss rate), `negative_error_rate` the
/// fraction of true negatives predicted positive; both follow the
/// misclassified-over-class-total convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive_error_rate: f64,
    pub negative_error_rate: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics for `predicted` against `truth`, where `true` marks the positive class.
pub fn compute_metrics(predicted: &[bool], truth: &[bool]) -> Result<ClassificationMetrics> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "prediction length {} != truth length {}",
            predicted.len(),
            truth.len()
        )));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth.iter()) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationMetrics {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
        positive_error_rate: ratio(fn_, tp + fn_),
        negative_error_rate: ratio(fp, fp + tn),
    })
}

/// Quantile with linear interpolation between order statistics
/// (`h = (n-1) p`, the convention spreadsheets and numpy default to).
pub fn quantile_interpolated(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("quantile of empty set".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "quantile level must be in [0,1], got {p}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[lo])
    }
}
