//! F1 evaluation grid over dataset size, outage severity and method.
//!
//! Per grid cell: generate a labeled dataset at the requested size with the
//! severity's outage prefix and a fixed 1% forged-report rate, split 70/30
//! stratified, train both detectors on the training split and score the test
//! split on the anomalous class (real outage or forged).
//!
//! The autoencoder trains on the training split's normal rows only; its
//! threshold is the adaptive quantile of the test-split error distribution at
//! the known anomaly ratio (simulator omniscience supplies the count, the
//! detector never reads a label). The comparator is the supervised boosted
//! ensemble trained on the same standardized features.

use std::fmt::Write as _;

use crate::adm::{
    ae_calibrate_threshold, ae_reconstruction_error, ae_train, gbt_predict, gbt_train, AeConfig,
    GbtConfig,
};
use crate::adversary::{inject_malicious, AttackSpec, OutageValueModel};
use crate::error::Result;
use crate::learn::{compute_metrics, standardize_fit, standardize_apply, stratified_split};
use crate::rng;
use crate::scenario::{generate_reports, Label, ScenarioConfig};

/// Grid description: the scenario template is reused for every cell with its
/// `n_reports` and `outage_cells` replaced per (size, severity).
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub template: ScenarioConfig,
    pub attack: AttackSpec,
    /// Severity v uses the first v entries.
    pub outage_prefix: Vec<u32>,
    pub sizes: Vec<usize>,
    pub severities: Vec<usize>,
    pub test_fraction: f64,
    pub ae: AeConfig,
    pub gbt: GbtConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub size: usize,
    pub severity: usize,
    pub method: &'static str,
    pub f1: f64,
}

/// Runs the full grid; one row per (size, severity, method), sizes outermost.
pub fn evaluate_grid(spec: &GridSpec) -> Result<Vec<GridCell>> {
    let mut out = Vec::with_capacity(spec.sizes.len() * spec.severities.len() * 2);
    for (si, &size) in spec.sizes.iter().enumerate() {
        for (vi, &severity) in spec.severities.iter().enumerate() {
            let cell_seed = rng::mix(spec.seed, si as u64 + 1, vi as u64 + 1);
            let (ae_f1, gbt_f1) = evaluate_cell(spec, size, severity, cell_seed)?;
            out.push(GridCell {
                size,
                severity,
                method: "ae",
                f1: ae_f1,
            });
            out.push(GridCell {
                size,
                severity,
                method: "gbt",
                f1: gbt_f1,
            });
        }
    }
    Ok(out)
}

fn evaluate_cell(spec: &GridSpec, size: usize, severity: usize, seed: u64) -> Result<(f64, f64)> {
    let mut config = spec.template.clone();
    config.n_reports = size;
    config.outage_cells = spec.outage_prefix[..severity].to_vec();
    config.rng_seed = seed;

    let (clean, _) = generate_reports(&config)?;
    let value_model = OutageValueModel::fit(&clean).ok();
    let mut attack = spec.attack.clone();
    attack.seed = rng::mix(seed, 0xA77AC4, 1);
    let dataset = inject_malicious(&clean, &attack, value_model.as_ref())?;

    let labels = dataset.labels();
    let (train_idx, test_idx) = stratified_split(&labels, spec.test_fraction, seed)?;
    let features = dataset.feature_matrix();

    let train_normal_idx: Vec<usize> = train_idx
        .iter()
        .cloned()
        .filter(|&i| labels[i] == Label::Normal)
        .collect();
    let scaler = standardize_fit(&features.select_rows(&train_normal_idx));
    let train_all = standardize_apply(&features.select_rows(&train_idx), &scaler);
    let train_normals = standardize_apply(&features.select_rows(&train_normal_idx), &scaler);
    let test_all = standardize_apply(&features.select_rows(&test_idx), &scaler);

    let truth: Vec<bool> = test_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let anomaly_ratio = truth.iter().filter(|t| **t).count() as f64 / truth.len() as f64;

    // Autoencoder route.
    let mut ae_config = spec.ae.clone();
    ae_config.seed = seed;
    let ae = ae_train(&train_normals, &ae_config)?;
    let errors = ae_reconstruction_error(&ae, &test_all);
    let threshold = ae_calibrate_threshold(&errors, anomaly_ratio)?;
    let ae_flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
    let ae_f1 = compute_metrics(&ae_flags, &truth)?.f1;

    // Boosted-tree route.
    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let gbt = gbt_train(&train_all, &train_labels, &spec.gbt)?;
    let gbt_flags: Vec<bool> = gbt_predict(&gbt, &test_all)
        .into_iter()
        .map(|p| p > 0.5)
        .collect();
    let gbt_f1 = compute_metrics(&gbt_flags, &truth)?.f1;

    Ok((ae_f1, gbt_f1))
}

/// `size,severity,method,f1` CSV.
pub fn grid_to_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("size,severity,method,f1\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{:.6}", c.size, c.severity, c.method, c.f1);
    }
    out
}
