//! Combined-lever hunt for the stage-1 autoencoder: outage-region shape,
//! pathloss slope, shadowing correlation, architecture and training length.

use mdtsim::adm::{ae_calibrate_threshold, ae_reconstruction_error, ae_train, AeConfig};
use mdtsim::adversary::{inject_malicious, AttackSpec, ForgeStrategy};
use mdtsim::geometry::{Area, Point};
use mdtsim::learn::{compute_metrics, standardize_apply, standardize_fit, stratified_split};
use mdtsim::radio::{CellSite, NetworkLayout, PathlossParams};
use mdtsim::scenario::{generate_reports, Label, ReportingMode, ScenarioConfig};
use mdtsim::shadowing::ShadowingParams;

#[derive(Clone)]
struct Knobs {
    slope: f64,
    sigma: f64,
    d_corr: f64,
    hidden: Vec<usize>,
    epochs: usize,
    lr: f64,
}

fn scenario(k: &Knobs, n_reports: usize, outage: Vec<u32>, seed: u64) -> ScenarioConfig {
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
            pathloss: PathlossParams {
                intercept_db: 128.1,
                slope_db_per_decade: k.slope,
                min_distance_m: 10.0,
            },
            shadowing: ShadowingParams {
                sigma_db: k.sigma,
                decorrelation_distance_m: k.d_corr,
            },
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

fn ae_f1(k: &Knobs, n_reports: usize, outage: Vec<u32>, seed: u64) -> f64 {
    let cfg = scenario(k, n_reports, outage, seed);
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
            epochs: k.epochs,
            hidden_widths: k.hidden.clone(),
            learning_rate: k.lr,
            batch_size: 32,
            seed,
        },
    )
    .unwrap();
    let errors = ae_reconstruction_error(&ae, &test_all);
    let threshold = ae_calibrate_threshold(&errors, ratio).unwrap();
    let flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
    compute_metrics(&flags, &truth).unwrap().f1
}

fn main() {
    let base = Knobs {
        slope: 43.0,
        sigma: 4.0,
        d_corr: 100.0,
        hidden: vec![12, 6, 2, 6, 12],
        epochs: 200,
        lr: 0.05,
    };
    // Top-row prefix: severity grows along the area edge.
    let prefix = [0u32, 1, 2];
    println!("--- severities with base knobs, top-row prefix ---");
    for severity in 1..=3usize {
        let f1 = ae_f1(&base, 7500, prefix[..severity].to_vec(), 31);
        println!("severity {severity}: ae_f1 = {f1:.3}");
    }
    println!("--- single levers off the base (severity 1) ---");
    for (label, k) in [
        ("slope 37.6", Knobs { slope: 37.6, ..base.clone() }),
        ("slope 48", Knobs { slope: 48.0, ..base.clone() }),
        ("sigma 3", Knobs { sigma: 3.0, ..base.clone() }),
        ("sigma 6", Knobs { sigma: 6.0, ..base.clone() }),
        ("d_corr 50", Knobs { d_corr: 50.0, ..base.clone() }),
        ("d_corr 150", Knobs { d_corr: 150.0, ..base.clone() }),
        ("hidden 8-4-8", Knobs { hidden: vec![8, 4, 8], ..base.clone() }),
        ("hidden 12-2-12", Knobs { hidden: vec![12, 2, 12], ..base.clone() }),
        ("epochs 400", Knobs { epochs: 400, ..base.clone() }),
        ("lr 0.1", Knobs { lr: 0.1, ..base.clone() }),
    ] {
        let f1 = ae_f1(&k, 7500, vec![0], 31);
        println!("{label}: ae_f1 = {f1:.3}");
    }
    println!("--- corner-cluster prefix [0,1,3] ---");
    for severity in 1..=3usize {
        let f1 = ae_f1(&base, 7500, [0u32, 1, 3][..severity].to_vec(), 31);
        println!("severity {severity}: ae_f1 = {f1:.3}");
    }
}
