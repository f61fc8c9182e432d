//! Autoencoder architecture hunt: can reconstruction error separate outage
//! rows once the bottleneck stops carrying the level shift?

use mdtsim::adm::{
    ae_calibrate_threshold, ae_reconstruction_error, ae_train, AeConfig,
};
use mdtsim::adversary::{inject_malicious, AttackSpec, ForgeStrategy};
use mdtsim::geometry::{Area, Point};
use mdtsim::learn::{compute_metrics, quantile_interpolated, standardize_apply, standardize_fit, stratified_split};
use mdtsim::radio::{CellSite, NetworkLayout, PathlossParams};
use mdtsim::scenario::{generate_reports, Label, ReportingMode, ScenarioConfig};
use mdtsim::shadowing::ShadowingParams;

fn scenario(sigma: f64, n_reports: usize, outage: Vec<u32>, seed: u64) -> ScenarioConfig {
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
    ScenarioConfig {
        layout: NetworkLayout {
            sites,
            area,
            noise_dbm_per_rb: -112.4,
            pathloss: PathlossParams::default(),
            shadowing: ShadowingParams { sigma_db: sigma, decorrelation_distance_m: 50.0 },
        },
        n_ues: 1000,
        n_reports,
        outage_cells: outage,
        reporting_mode: ReportingMode::Immediate,
        logged_period: 1,
        max_ticks: 10_000,
        rng_seed: seed,
    }
}

fn run(sigma: f64, hidden: Vec<usize>, epochs: usize, lr: f64, batch: usize, seed: u64) {
    let cfg = scenario(sigma, 7500, vec![0, 5, 4], seed);
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
    let test_all = standardize_apply(&features.select_rows(&test_idx), &scaler);
    let truth: Vec<bool> = test_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let ratio = truth.iter().filter(|t| **t).count() as f64 / truth.len() as f64;

    let ae = ae_train(
        &train_n,
        &AeConfig {
            epochs,
            hidden_widths: hidden.clone(),
            learning_rate: lr,
            batch_size: batch,
            seed,
        },
    )
    .unwrap();
    let errors = ae_reconstruction_error(&ae, &test_all);
    let threshold = ae_calibrate_threshold(&errors, ratio).unwrap();
    let flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
    let f1 = compute_metrics(&flags, &truth).unwrap().f1;

    let mut err_normal: Vec<f64> = errors
        .iter()
        .zip(truth.iter())
        .filter(|(_, t)| !**t)
        .map(|(e, _)| *e)
        .collect();
    let mut err_anom: Vec<f64> = errors
        .iter()
        .zip(truth.iter())
        .filter(|(_, t)| **t)
        .map(|(e, _)| *e)
        .collect();
    err_normal.sort_by(|a, b| a.partial_cmp(b).unwrap());
    err_anom.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "sigma {sigma}, hidden {hidden:?}, epochs {epochs}, lr {lr}, batch {batch}: f1 = {f1:.3} | normal err p50={:.3} p95={:.3} | anom err p05={:.3} p50={:.3} | final loss {:.4}",
        quantile_interpolated(&err_normal, 0.5).unwrap(),
        quantile_interpolated(&err_normal, 0.95).unwrap(),
        quantile_interpolated(&err_anom, 0.05).unwrap(),
        quantile_interpolated(&err_anom, 0.5).unwrap(),
        ae.final_epoch_loss,
    );
}

fn main() {
    for hidden in [vec![8usize, 2, 8], vec![8, 4, 8], vec![12, 2, 12], vec![12, 6, 2, 6, 12]] {
        run(4.0, hidden, 150, 0.05, 32, 21);
    }
    println!("---- longer training, bottleneck 2 ----");
    run(4.0, vec![12, 2, 12], 400, 0.05, 32, 21);
    run(4.0, vec![12, 2, 12], 400, 0.1, 32, 21);
    println!("---- sigma effect with bottleneck 2 ----");
    for sigma in [2.0, 3.0, 4.0, 6.0, 8.0] {
        run(sigma, vec![12, 2, 12], 150, 0.05, 32, 21);
    }
}
