//! Detector-quality sweep: stage-1 F1 of both methods across shadowing sigma,
//! AE architecture and training length, on the grid-style scenario.

use mdtsim::adm::{
    ae_calibrate_threshold, ae_reconstruction_error, ae_train, gbt_predict, gbt_train, AeConfig,
    GbtConfig,
};
use mdtsim::adversary::{inject_malicious, AttackSpec, ForgeStrategy};
use mdtsim::geometry::{Area, Point};
use mdtsim::learn::{compute_metrics, standardize_apply, standardize_fit, stratified_split};
use mdtsim::radio::{CellSite, NetworkLayout, PathlossParams};
use mdtsim::scenario::{generate_reports, Label, ReportingMode, ScenarioConfig};
use mdtsim::shadowing::ShadowingParams;

fn grid_layout(sigma: f64, d_corr: f64) -> NetworkLayout {
    let area = Area::new(1000.0, 1000.0);
    let mut sites = Vec::new();
    for r in 0..3 {
        for c in 0..3 {
            sites.push(CellSite {
                id: (r * 3 + c) as u32,
                position: Point::new(
                    (c as f64 + 0.5) * area.width_m / 3.0,
                    (r as f64 + 0.5) * area.height_m / 3.0,
                ),
                tx_power_dbm: 46.0,
                bandwidth_rb: 50,
                active: true,
            });
        }
    }
    NetworkLayout {
        sites,
        area,
        noise_dbm_per_rb: -112.4,
        pathloss: PathlossParams::default(),
        shadowing: ShadowingParams {
            sigma_db: sigma,
            decorrelation_distance_m: d_corr,
        },
    }
}

fn one_cell(
    sigma: f64,
    d_corr: f64,
    n_reports: usize,
    outage: Vec<u32>,
    epochs: usize,
    hidden: Vec<usize>,
    seed: u64,
) -> (f64, f64) {
    let cfg = ScenarioConfig {
        layout: grid_layout(sigma, d_corr),
        n_ues: 1000,
        n_reports,
        outage_cells: outage,
        reporting_mode: ReportingMode::Immediate,
        logged_period: 1,
        max_ticks: 10_000,
        rng_seed: seed,
    };
    let (clean, _) = generate_reports(&cfg).unwrap();
    let spec = AttackSpec::new(ForgeStrategy::ForgeLowRsrp, 0.01, seed + 1);
    let ds = inject_malicious(&clean, &spec, None).unwrap();
    let labels = ds.labels();
    let features = ds.feature_matrix();
    let (train_idx, test_idx) = stratified_split(&labels, 0.3, seed).unwrap();
    let train_norm: Vec<usize> = train_idx
        .iter()
        .cloned()
        .filter(|&i| labels[i] == Label::Normal)
        .collect();
    let scaler = standardize_fit(&features.select_rows(&train_norm));
    let train_n = standardize_apply(&features.select_rows(&train_norm), &scaler);
    let train_all = standardize_apply(&features.select_rows(&train_idx), &scaler);
    let test_all = standardize_apply(&features.select_rows(&test_idx), &scaler);
    let truth: Vec<bool> = test_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let ratio = truth.iter().filter(|t| **t).count() as f64 / truth.len() as f64;

    let ae = ae_train(
        &train_n,
        &AeConfig {
            epochs,
            hidden_widths: hidden,
            seed,
            ..AeConfig::default()
        },
    )
    .unwrap();
    let errors = ae_reconstruction_error(&ae, &test_all);
    let threshold = ae_calibrate_threshold(&errors, ratio).unwrap();
    let flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
    let ae_f1 = compute_metrics(&flags, &truth).unwrap().f1;

    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let gbt = gbt_train(&train_all, &train_labels, &GbtConfig::default()).unwrap();
    let gbt_flags: Vec<bool> = gbt_predict(&gbt, &test_all).into_iter().map(|p| p > 0.5).collect();
    let gbt_f1 = compute_metrics(&gbt_flags, &truth).unwrap().f1;
    (ae_f1, gbt_f1)
}

fn main() {
    println!("--- sigma sweep (7500 reports, 3-cell outage, AE 8-4-8 x60) ---");
    for sigma in [2.0, 3.0, 4.0, 5.0, 6.0, 8.0] {
        let (ae, gbt) = one_cell(sigma, 50.0, 7500, vec![0, 5, 4], 60, vec![8, 4, 8], 11);
        println!("sigma {sigma}: ae_f1 = {ae:.3}, gbt_f1 = {gbt:.3}");
    }
    println!("--- architecture/epoch sweep at sigma 4 ---");
    for (epochs, hidden) in [
        (60usize, vec![8usize, 4, 8]),
        (150, vec![8, 4, 8]),
        (60, vec![12, 6, 12]),
        (150, vec![12, 6, 12]),
        (150, vec![12, 4, 12]),
    ] {
        let (ae, gbt) = one_cell(4.0, 50.0, 7500, vec![0, 5, 4], epochs, hidden.clone(), 11);
        println!("epochs {epochs}, hidden {hidden:?}: ae_f1 = {ae:.3}, gbt_f1 = {gbt:.3}");
    }
    println!("--- severity/size matrix at sigma 4, AE 12-6-12 x150 ---");
    for &size in &[2500usize, 7500] {
        for severity in 1..=3usize {
            let outage: Vec<u32> = [0u32, 5, 4][..severity].to_vec();
            let (ae, gbt) = one_cell(4.0, 50.0, size, outage, 150, vec![12, 6, 12], 13);
            println!("size {size}, severity {severity}: ae_f1 = {ae:.3}, gbt_f1 = {gbt:.3}");
        }
    }
    println!("--- d_corr effect at sigma 4 ---");
    for d_corr in [25.0, 50.0, 100.0] {
        let (ae, gbt) = one_cell(4.0, d_corr, 7500, vec![0, 5, 4], 150, vec![12, 6, 12], 11);
        println!("d_corr {d_corr}: ae_f1 = {ae:.3}, gbt_f1 = {gbt:.3}");
    }
}
