//! Scratch diagnostics for tuning: prints signal distributions per label,
//! detector behavior and SON KPI deltas on the reference scenarios.

use mdtsim::adm::{ae_reconstruction_error, ae_train, AeConfig};
use mdtsim::adversary::{inject_malicious, AttackSpec, ForgeStrategy, OutageValueModel, TargetRegion};
use mdtsim::geometry::Point;
use mdtsim::learn::{quantile_interpolated, standardize_apply, standardize_fit, stratified_split};
use mdtsim::pipeline::{run_mrif, train_models, MrifOptions, TrainOptions};
use mdtsim::radio::{CellSite, NetworkLayout, PathlossParams};
use mdtsim::scenario::{build_env, generate_reports, generate_reports_in_env, Label, ReportingMode, ScenarioConfig};
use mdtsim::shadowing::ShadowingParams;
use mdtsim::son::{evaluate_kpis, geographic_best_server, nearest_neighbor_cells, apply_coc, CocAction};
use mdtsim::geometry::Area;

fn grid_layout(rows: usize, cols: usize, sigma: f64) -> NetworkLayout {
    let area = Area::new(1000.0, 1000.0);
    let mut sites = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            sites.push(CellSite {
                id: (r * cols + c) as u32,
                position: Point::new(
                    (c as f64 + 0.5) * area.width_m / cols as f64,
                    (r as f64 + 0.5) * area.height_m / rows as f64,
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
        shadowing: ShadowingParams { sigma_db: sigma, decorrelation_distance_m: 50.0 },
    }
}

fn config(n_ues: usize, n_reports: usize, outage: Vec<u32>, seed: u64, sigma: f64) -> ScenarioConfig {
    ScenarioConfig {
        layout: grid_layout(3, 3, sigma),
        n_ues,
        n_reports,
        outage_cells: outage,
        reporting_mode: ReportingMode::Immediate,
        logged_period: 1,
        max_ticks: 10_000,
        rng_seed: seed,
    }
}

fn pct(sorted: &[f64], p: f64) -> f64 {
    quantile_interpolated(sorted, p).unwrap()
}

fn summarize(name: &str, values: &mut Vec<f64>) {
    if values.is_empty() {
        println!("{name}: empty");
        return;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "{name}: n={} p05={:.1} p25={:.1} p50={:.1} p75={:.1} p95={:.1}",
        values.len(),
        pct(values, 0.05),
        pct(values, 0.25),
        pct(values, 0.50),
        pct(values, 0.75),
        pct(values, 0.95)
    );
}

fn main() {
    // 1. Serving RSRP distributions per label, 3-cell outage.
    let cfg = config(1000, 2000, vec![0, 4, 8], 1, 6.0);
    let (ds, _) = generate_reports(&cfg).unwrap();
    let mut normal: Vec<f64> = ds.reports.iter().filter(|r| r.label == Label::Normal).map(|r| r.serving_rsrp_dbm).collect();
    let mut outage: Vec<f64> = ds.reports.iter().filter(|r| r.label == Label::RealOutage).map(|r| r.serving_rsrp_dbm).collect();
    summarize("normal serving rsrp", &mut normal);
    summarize("outage serving rsrp", &mut outage);
    let mut normal_rsrq: Vec<f64> = ds.reports.iter().filter(|r| r.label == Label::Normal).map(|r| r.serving_rsrq_db).collect();
    let mut outage_rsrq: Vec<f64> = ds.reports.iter().filter(|r| r.label == Label::RealOutage).map(|r| r.serving_rsrq_db).collect();
    summarize("normal serving rsrq", &mut normal_rsrq);
    summarize("outage serving rsrq", &mut outage_rsrq);

    // Trigger behavior per floor.
    for floor in [-95.0, -98.0, -100.0, -102.0, -105.0] {
        let below_normal = normal.iter().filter(|v| **v < floor).count();
        let below_outage = outage.iter().filter(|v| **v < floor).count();
        println!("floor {floor}: normal below = {below_normal}, outage below = {below_outage}");
    }

    // 2. AE stage-1 quality on the small pipeline test scenario.
    let cfg = config(400, 1000, vec![0, 4], 2, 6.0);
    let (clean, _) = generate_reports(&cfg).unwrap();
    let model = OutageValueModel::fit(&clean).unwrap();
    let spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.05, 3);
    let ds = inject_malicious(&clean, &spec, Some(&model)).unwrap();
    let labels = ds.labels();
    let features = ds.feature_matrix();
    let (train_idx, test_idx) = stratified_split(&labels, 0.3, 2).unwrap();
    let train_norm: Vec<usize> = train_idx.iter().cloned().filter(|&i| labels[i] == Label::Normal).collect();
    let scaler = standardize_fit(&features.select_rows(&train_norm));
    let train_n = standardize_apply(&features.select_rows(&train_norm), &scaler);
    let all = standardize_apply(&features, &scaler);
    for epochs in [25usize, 60, 120] {
        let ae = ae_train(&train_n, &AeConfig { epochs, seed: 2, ..AeConfig::default() }).unwrap();
        let errors = ae_reconstruction_error(&ae, &all);
        let ratio = labels.iter().filter(|l| **l != Label::Normal).count() as f64 / labels.len() as f64;
        let threshold = quantile_interpolated(&errors, 1.0 - ratio).unwrap();
        let flags: Vec<bool> = errors.iter().map(|e| *e > threshold).collect();
        let truth: Vec<bool> = labels.iter().map(|l| *l != Label::Normal).collect();
        let m = mdtsim::learn::compute_metrics(&flags, &truth).unwrap();
        println!("AE epochs={epochs}: stage1 f1 = {:.4} (ratio {:.3})", m.f1, ratio);
        let _ = test_idx.len();
    }

    // 3. Pipeline on the paper-ish baseline: detection quality.
    let cfg = config(1000, 7500, vec![0, 5, 4], 5, 6.0);
    let env = build_env(&cfg, &[]).unwrap();
    let clean = generate_reports_in_env(&cfg, &env).unwrap();
    let model = OutageValueModel::fit(&clean).unwrap();
    let spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.01, 5);
    let ds = inject_malicious(&clean, &spec, Some(&model)).unwrap();
    let opts = TrainOptions { ae: AeConfig { epochs: 60, ..AeConfig::default() }, seed: 5, ..TrainOptions::default() };
    let (bundle, report) = train_models(&ds, &opts).unwrap();
    println!("train report: skipped = {:?}, anomaly ratio {:.3}", report.skipped, report.anomaly_ratio);
    let (_, metrics, _) = run_mrif(&ds, &bundle, &MrifOptions::default(), None).unwrap();
    println!(
        "paper-ish run: stage1_f1={:.3} mal_recall={:.3} mal_prec={:.3} real_misflag={:.3}",
        metrics.stage1_f1, metrics.malicious_recall, metrics.malicious_precision, metrics.real_outage_misflag_rate
    );

    // 4. SON mean-SINR deltas: whole network vs attacked region.
    for seed in [7u64, 8, 9, 10] {
        let cfg = config(800, 800, vec![], seed, 6.0);
        let env = build_env(&cfg, &[]).unwrap();
        let indices: Vec<usize> = (0..800).collect();
        let framed = 8u32;
        let region: Vec<usize> = indices
            .iter()
            .cloned()
            .filter(|&i| geographic_best_server(&cfg.layout, &env.fields.positions()[i]) == framed)
            .collect();
        let neighbors = nearest_neighbor_cells(&cfg.layout, framed, 3).unwrap();
        let boosted = apply_coc(&cfg.layout, &CocAction { outage_cell: framed, compensating_cells: neighbors, power_boost_db: 3.0 }).unwrap();
        let before_all = evaluate_kpis(&cfg.layout, &env.fields, &indices, -6.0).unwrap();
        let after_all = evaluate_kpis(&boosted, &env.fields, &indices, -6.0).unwrap();
        let before_region = evaluate_kpis(&cfg.layout, &env.fields, &region, -6.0).unwrap();
        let after_region = evaluate_kpis(&boosted, &env.fields, &region, -6.0).unwrap();
        println!(
            "seed {seed}: whole mean delta {:+.4} dB, region mean delta {:+.4} dB (region n={})",
            after_all.mean_sinr_db - before_all.mean_sinr_db,
            after_region.mean_sinr_db - before_region.mean_sinr_db,
            region.len()
        );
    }

    // 5. Concentrated forge attack: does LOF alone catch it?
    let train_cfg = config(700, 2100, vec![0], 8, 6.0);
    let (train_clean, _) = generate_reports(&train_cfg).unwrap();
    let model = OutageValueModel::fit(&train_clean).unwrap();
    let train_spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.01, 8);
    let train_ds = inject_malicious(&train_clean, &train_spec, Some(&model)).unwrap();
    let (bundle, _) = train_models(&train_ds, &TrainOptions { seed: 8, ..TrainOptions::default() }).unwrap();

    let attack_cfg = config(700, 2100, vec![], 9, 6.0);
    let env = build_env(&attack_cfg, &[]).unwrap();
    let clean = generate_reports_in_env(&attack_cfg, &env).unwrap();
    let mut spec = AttackSpec::new(ForgeStrategy::ForgeLowRsrp, 0.01, 9);
    spec.target_region = Some(TargetRegion { center: Point::new(833.3, 833.3), radius_m: 150.0 });
    let attacked = inject_malicious(&clean, &spec, None).unwrap();
    let opts = MrifOptions { check_digest: false, anomaly_ratio: Some(0.02), ..MrifOptions::default() };
    let (verdicts, metrics, _) = run_mrif(&attacked, &bundle, &opts, None).unwrap();
    let caught = verdicts
        .iter()
        .zip(attacked.reports.iter())
        .filter(|(v, r)| r.label == Label::Malicious && v.final_label == Label::Malicious)
        .count();
    let total = attacked.reports.iter().filter(|r| r.label == Label::Malicious).count();
    println!("concentrated attack: caught {caught}/{total}, stage1_f1={:.3}", metrics.stage1_f1);
}
