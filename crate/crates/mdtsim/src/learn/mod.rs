//! Shared numeric substrate for the detectors: dense row-major matrices,
//! column standardization, PCA over a Jacobi eigensolver, stratified splits,
//! quantiles and classification metrics.

mod matrix;
mod metrics;
mod pca;
mod split;

pub use matrix::FeatureMatrix;
pub use metrics::{compute_metrics, quantile_interpolated, ClassificationMetrics};
pub use pca::{pca_fit, pca_project, PcaBasis};
pub use split::stratified_split;

use serde::{Deserialize, Serialize};

/// Column means and standard deviations fitted on training rows.
/// Columns with zero spread keep std 1 so standardization only removes the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizeParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fits per-column mean/std (population) on the training matrix.
pub fn standardize_fit(train: &FeatureMatrix) -> StandardizeParams {
    let cols = train.cols();
    let n = train.rows() as f64;
    let mut means = vec![0.0; cols];
    for r in 0..train.rows() {
        for (c, v) in train.row(r).iter().enumerate() {
            means[c] += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; cols];
    for r in 0..train.rows() {
        for (c, v) in train.row(r).iter().enumerate() {
            let d = v - means[c];
            vars[c] += d * d;
        }
    }
    let stds = vars
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    StandardizeParams { means, stds }
}

/// Applies previously fitted parameters; test rows are never refit.
pub fn standardize_apply(m: &FeatureMatrix, params: &StandardizeParams) -> FeatureMatrix {
    let mut data = Vec::with_capacity(m.rows() * m.cols());
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            data.push((v - params.means[c]) / params.stds[c]);
        }
    }
    FeatureMatrix::new(m.rows(), m.cols(), data).expect("shape preserved")
}

pub fn standardize_fit_transform(train: &FeatureMatrix) -> (FeatureMatrix, StandardizeParams) {
    let params = standardize_fit(train);
    (standardize_apply(train, &params), params)
}
