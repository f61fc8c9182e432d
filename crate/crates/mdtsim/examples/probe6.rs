//! Wide-sandwich architectures around a 2-unit code; approximation-floor probe.

use mdtsim::adm::{ae_calibrate_threshold, ae_reconstruction_error, ae_train, AeConfig};
use mdtsim::adversary::{inject_malicious, AttackSpec, ForgeStrategy};
use mdtsim::geometry::{Area, Point};
use mdtsim::learn::{compute_metrics, standardize_apply, standardize_fit, stratified_split};
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
                position: Point::new((c as f64 + 0.5) * 333.3333333, (r as f64 + 0.5) * 333.3333333),
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
            pathloss: PathlossParams { intercept_db: 128.1, slope_db_per_decade: 43.0, min_distance_m: 10.0 },
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

fn trial(sigma: f64, hidden: Vec<usize>, epochs: usize, lr: f64, batch: usize, outage: Vec<u32>, seed: u64) -> f64 {
    let cfg = scenario(sigma, 7500, outage.clone(), seed);
    let (clean, _) = generate_reports(&cfg).unwrap();
    let spec = AttackSpec::new(ForgeStrategy::ForgeLowRsrp, 0.01, seed + 1);
    let ds = inject_malicious(&clean, &spec, None).unwrap();
    let labels = ds.labels();
    let features = ds.feature_matrix();
    let (train_idx, test_idx) = stratified_split(&labels, 0.3, seed).unwrap();
    let train_norm: Vec<usize> = train_idx.iter().cloned().filter(|&i| labels[i] == Label::Normal).collect();
    let scaler = standardize_fit(&features.select_rows(&train_norm));
    let train_n = standardize_apply(&features.select_rows(&train_norm), &scaler);
    let test_all = standardize_apply(&features.select_rows(&test_idx), &scaler);
    let truth: Vec<bool> = test_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let ratio = truth.iter().filter(|t| **t).count() as f64 / truth.len() as f64;
    let ae = ae_train(&train_n, &AeConfig { epochs, hidden_widths: hidden.clone(), learning_rate: lr, batch_size: batch, seed }).unwrap();
    let errors = ae_reconstruction_error(&ae, &test_all);
    let threshold = ae_calibrate_threshold(&errors, ratio).unwrap();
    let flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
    let f1 = compute_metrics(&flags, &truth).unwrap().f1;
    println!("sigma {sigma} hidden {hidden:?} ep {epochs} lr {lr} b{batch} outage {outage:?} seed {seed}: f1 = {f1:.3} (loss {:.4})", ae.final_epoch_loss);
    f1
}

fn main() {
    println!("--- approximation floor at sigma 0.5 ---");
    for hidden in [vec![16usize, 2, 16], vec![24, 2, 24], vec![16, 8, 2, 8, 16]] {
        trial(0.5, hidden, 300, 0.02, 32, vec![0], 31);
    }
    println!("--- sandwich architectures at sigma 3 ---");
    for hidden in [vec![16usize, 2, 16], vec![24, 2, 24], vec![32, 2, 32]] {
        trial(3.0, hidden, 300, 0.02, 32, vec![0], 31);
    }
    println!("--- seed stability of the best sandwich ---");
    for seed in [31u64, 41, 51, 61, 71] {
        trial(3.0, vec![24, 2, 24], 300, 0.02, 32, vec![0], seed);
    }
}
