//! The end-to-end report screening flow and the guarded SON engine.
//!
//! Stage 1 (anomaly detection) flags reports whose reconstruction error
//! exceeds the quantile threshold. Stage 2 decides fake vs real for flagged
//! reports: a report is malicious when both the LOF frontier and the regional
//! neighbor-count rule call it malicious — the count rule cross-checks the
//! frontier, which by construction leaves a contamination share of genuine
//! outage reports outside. Stage 3 optionally dispatches a drive tester to
//! cells where flagged reports are sparse and overrides their verdicts with
//! the re-measurement outcome.
//!
//! The guarded SON engine is the trusting engine fed through this screen:
//! only reports whose final verdict is normal or real-outage reach the outage
//! trigger.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adm::{
    ae_reconstruction_error, ae_train, gbt_train, AeConfig, AutoencoderModel, GbtConfig, GbtModel,
};
use crate::digest;
use crate::error::{Error, Result};
use crate::fdt::{dispatch_and_verify, FdtFleet, FdtVerdict, VerificationResult};
use crate::geometry::centroid;
use crate::learn::{
    compute_metrics, quantile_interpolated, standardize_apply, standardize_fit, StandardizeParams,
};
use crate::mrfm::{mrfm_classify, mrfm_fit, regional_count_rule, LofModel, LofOutcome, LofParams, RegionalOutcome, RegionalRule};
use crate::radio::NetworkLayout;
use crate::scenario::{Dataset, Label, MdtReport, FEATURE_NAMES};
use crate::shadowing::SiteFields;
use crate::son::{
    evaluate_kpis, nearest_neighbor_cells, trigger_outage_detection, CocAction, KpiSummary,
    SonEngine, TriggerConfig,
};

pub const BUNDLE_VERSION: u32 = 1;

/// Trained detector state for one scenario family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    /// Digest of the generating scenario config of the training dataset.
    pub config_digest: String,
    pub feature_schema: Vec<String>,
    /// Anomalous share of the training split; default calibration ratio.
    pub anomaly_ratio: f64,
    pub scaler: StandardizeParams,
    pub autoencoder: AutoencoderModel,
    /// Absent when training had a single class.
    pub gbt: Option<GbtModel>,
    /// Absent when training had too few real-outage reports.
    pub lof: Option<LofModel>,
    pub regional: RegionalRule,
}

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<ModelBundle> {
        let bundle: ModelBundle = serde_json::from_str(json)?;
        if bundle.version != BUNDLE_VERSION {
            return Err(Error::Compatibility(format!(
                "bundle version {} unsupported (expected {BUNDLE_VERSION})",
                bundle.version
            )));
        }
        if bundle.feature_schema != FEATURE_NAMES {
            return Err(Error::Compatibility(
                "bundle feature schema does not match this build".into(),
            ));
        }
        Ok(bundle)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: &std::path::Path) -> Result<ModelBundle> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn digest(&self) -> Result<String> {
        digest::of(self)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub test_fraction: f64,
    pub ae: AeConfig,
    pub gbt: GbtConfig,
    pub lof: LofParams,
    pub regional: RegionalRule,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            test_fraction: 0.3,
            ae: AeConfig::default(),
            gbt: GbtConfig::default(),
            lof: LofParams::default(),
            regional: RegionalRule::default(),
            seed: 0,
        }
    }
}

/// What training produced, for the training report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingReport {
    pub n_train_rows: usize,
    pub n_test_rows: usize,
    pub anomaly_ratio: f64,
    pub ae_initial_epoch_loss: f64,
    pub ae_final_epoch_loss: f64,
    pub ae_threshold: Option<f64>,
    pub lof_threshold: Option<f64>,
    pub lof_training_reports: usize,
    /// Sub-models that could not be trained, with reasons.
    pub skipped: Vec<String>,
    pub bundle_digest: String,
}

/// Threshold calibration honoring the tie rule at a degenerate ratio: with no
/// anomalies expected, the threshold sits on the maximum observed error and
/// the strict comparison flags nothing.
fn calibrate_with_ratio(errors: &[f64], ratio: f64) -> Result<f64> {
    if ratio >= 0.5 {
        return Err(Error::InvalidInput(format!(
            "calibration ratio must be < 0.5, got {ratio}"
        )));
    }
    if ratio <= 0.0 {
        return quantile_interpolated(errors, 1.0);
    }
    crate::adm::ae_calibrate_threshold(errors, ratio)
}

/// Trains every sub-model the dataset supports; sub-models whose
/// preconditions fail are skipped and reported rather than failing the run.
pub fn train_models(dataset: &Dataset, opts: &TrainOptions) -> Result<(ModelBundle, TrainingReport)> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty dataset".into()));
    }
    let labels = dataset.labels();
    let features = dataset.feature_matrix();
    let (train_idx, test_idx) =
        crate::learn::stratified_split(&labels, opts.test_fraction, opts.seed)?;

    let train_normal_idx: Vec<usize> = train_idx
        .iter()
        .cloned()
        .filter(|&i| labels[i] == Label::Normal)
        .collect();
    let scaler = standardize_fit(&features.select_rows(&train_normal_idx));
    let train_normals = standardize_apply(&features.select_rows(&train_normal_idx), &scaler);
    let train_all = standardize_apply(&features.select_rows(&train_idx), &scaler);

    let mut skipped = Vec::new();

    let mut ae_config = opts.ae.clone();
    ae_config.seed = opts.seed;
    let mut autoencoder = ae_train(&train_normals, &ae_config)?;
    let anomalous_train = train_idx
        .iter()
        .filter(|&&i| labels[i] != Label::Normal)
        .count();
    let anomaly_ratio = anomalous_train as f64 / train_idx.len() as f64;
    let train_errors = ae_reconstruction_error(&autoencoder, &train_all);
    autoencoder.reconstruction_threshold = Some(calibrate_with_ratio(&train_errors, anomaly_ratio)?);

    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i] != Label::Normal).collect();
    let gbt = match gbt_train(&train_all, &train_labels, &opts.gbt) {
        Ok(model) => Some(model),
        Err(Error::Training { msg, .. }) => {
            skipped.push(format!("gbt: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };

    let real_outage_train: Vec<&MdtReport> = train_idx
        .iter()
        .filter(|&&i| labels[i] == Label::RealOutage)
        .map(|&i| &dataset.reports[i])
        .collect();
    let lof = match mrfm_fit(&real_outage_train, &opts.lof) {
        Ok(model) => Some(model),
        Err(Error::Fit(msg)) => {
            skipped.push(format!("lof: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };

    let bundle = ModelBundle {
        version: BUNDLE_VERSION,
        config_digest: dataset.config_digest.clone(),
        feature_schema: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        anomaly_ratio,
        scaler,
        autoencoder,
        gbt,
        lof,
        regional: opts.regional,
    };
    let report = TrainingReport {
        n_train_rows: train_idx.len(),
        n_test_rows: test_idx.len(),
        anomaly_ratio,
        ae_initial_epoch_loss: bundle.autoencoder.initial_epoch_loss,
        ae_final_epoch_loss: bundle.autoencoder.final_epoch_loss,
        ae_threshold: bundle.autoencoder.reconstruction_threshold,
        lof_threshold: bundle.lof.as_ref().map(|m| m.decision_threshold),
        lof_training_reports: real_outage_train.len(),
        skipped,
        bundle_digest: bundle.digest()?,
    };
    Ok((bundle, report))
}

// ---------------------------------------------------------------------------
// MRIF screening
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// Use the threshold stored in the bundle (train-time calibration).
    Stored,
    /// Recalibrate the quantile on the evaluated dataset's error distribution
    /// at the known anomaly ratio.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrifOptions {
    pub threshold_mode: ThresholdMode,
    /// Calibration ratio override; defaults to the bundle's training ratio.
    pub anomaly_ratio: Option<f64>,
    pub use_fdt: bool,
    /// A cell is drive-tested when its flagged share is below this and nonzero.
    pub fdt_threshold_fraction: f64,
    /// Measured serving RSRP below this confirms a real outage.
    pub fdt_floor_dbm: f64,
    pub check_digest: bool,
}

impl Default for MrifOptions {
    fn default() -> Self {
        MrifOptions {
            threshold_mode: ThresholdMode::Adaptive,
            anomaly_ratio: None,
            use_fdt: false,
            fdt_threshold_fraction: 0.05,
            fdt_floor_dbm: -115.0,
            check_digest: true,
        }
    }
}

/// World access for drive-tester verification.
pub struct FdtContext<'a> {
    /// The true current network, real outages included.
    pub layout: &'a NetworkLayout,
    pub fields: &'a SiteFields,
    pub fleet: &'a FdtFleet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Outcome {
    pub lof: Option<LofOutcome>,
    pub regional: RegionalOutcome,
    pub malicious: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage3Outcome {
    pub fdt_index: usize,
    pub verdict: FdtVerdict,
}

/// Per-report pipeline outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub report_index: usize,
    pub ue_id: u32,
    pub tick: u32,
    pub stage1_anomalous: bool,
    pub reconstruction_error: f64,
    /// Present exactly when stage 1 flagged the report.
    pub stage2: Option<Stage2Outcome>,
    pub stage3: Option<Stage3Outcome>,
    pub final_label: Label,
}

/// Aggregated pipeline quality against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n_reports: usize,
    /// `confusion[truth][final]` over (normal, real_outage, malicious).
    pub confusion: [[usize; 3]; 3],
    /// Misclassified share per true class.
    pub per_class_error_rate: [f64; 3],
    /// Stage-1 F1 on the anomalous class (real outage or malicious).
    pub stage1_f1: f64,
    pub malicious_recall: f64,
    pub malicious_precision: f64,
    /// Real-outage reports whose final verdict is malicious.
    pub real_outage_misflag_rate: f64,
    pub ue_true_compromised: usize,
    pub ue_flagged_compromised: usize,
    pub ue_detected_compromised: usize,
    pub n_fdt_dispatches: usize,
}

/// Runs the full screen over a dataset. `fdt` supplies the world when
/// `options.use_fdt` is set; verification entries are returned alongside.
pub fn run_mrif(
    dataset: &Dataset,
    bundle: &ModelBundle,
    options: &MrifOptions,
    fdt: Option<&FdtContext<'_>>,
) -> Result<(Vec<VerdictRecord>, MetricsSummary, Vec<(usize, VerificationResult)>)> {
    if options.check_digest
        && !dataset.config_digest.is_empty()
        && !bundle.config_digest.is_empty()
        && dataset.config_digest != bundle.config_digest
    {
        return Err(Error::Compatibility(format!(
            "dataset digest {} does not match bundle digest {}",
            dataset.config_digest, bundle.config_digest
        )));
    }
    if dataset.is_empty() {
        return Ok((Vec::new(), empty_metrics(), Vec::new()));
    }

    let features = standardize_apply(&dataset.feature_matrix(), &bundle.scaler);
    let errors = ae_reconstruction_error(&bundle.autoencoder, &features);
    let threshold = match options.threshold_mode {
        ThresholdMode::Stored => bundle
            .autoencoder
            .reconstruction_threshold
            .ok_or_else(|| Error::State("bundle autoencoder is uncalibrated".into()))?,
        ThresholdMode::Adaptive => calibrate_with_ratio(
            &errors,
            options.anomaly_ratio.unwrap_or(bundle.anomaly_ratio),
        )?,
    };

    let flagged_idx: Vec<usize> = (0..dataset.len()).filter(|&i| errors[i] > threshold).collect();
    let flagged_reports: Vec<&MdtReport> =
        flagged_idx.iter().map(|&i| &dataset.reports[i]).collect();

    let lof_outcomes: Option<Vec<LofOutcome>> = bundle
        .lof
        .as_ref()
        .map(|model| mrfm_classify(model, &flagged_reports));
    let regional_outcomes = regional_count_rule(&flagged_reports, &bundle.regional);

    // Stage-2 composition: the regional rule cross-checks the LOF frontier,
    // so a report is malicious only when both mechanisms agree.
    let mut stage2: BTreeMap<usize, Stage2Outcome> = BTreeMap::new();
    for (k, &idx) in flagged_idx.iter().enumerate() {
        let lof = lof_outcomes.as_ref().map(|o| o[k]);
        let malicious = match lof {
            Some(l) => l.malicious && regional_outcomes[k].malicious,
            None => regional_outcomes[k].malicious,
        };
        stage2.insert(
            idx,
            Stage2Outcome {
                lof,
                regional: regional_outcomes[k],
                malicious,
            },
        );
    }

    // Stage 3: drive-test cells with a sparse flagged share.
    let mut stage3: BTreeMap<usize, Stage3Outcome> = BTreeMap::new();
    let mut verification_log = Vec::new();
    if options.use_fdt {
        let context = fdt.ok_or_else(|| {
            Error::State("use_fdt set but no drive-tester context provided".into())
        })?;
        let mut totals: BTreeMap<u32, usize> = BTreeMap::new();
        for r in &dataset.reports {
            *totals.entry(r.serving_cell).or_insert(0) += 1;
        }
        let mut flagged_by_cell: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &idx in &flagged_idx {
            flagged_by_cell
                .entry(dataset.reports[idx].serving_cell)
                .or_default()
                .push(idx);
        }
        for (cell, members) in &flagged_by_cell {
            let fraction = members.len() as f64 / totals[cell] as f64;
            if fraction >= options.fdt_threshold_fraction {
                continue;
            }
            let positions: Vec<_> = members
                .iter()
                .map(|&i| dataset.reports[i].position)
                .collect();
            let target = centroid(&positions).expect("non-empty flagged set");
            let suspects: Vec<&MdtReport> =
                members.iter().map(|&i| &dataset.reports[i]).collect();
            let (fdt_index, result) = dispatch_and_verify(
                context.fleet,
                &target,
                &suspects,
                context.layout,
                context.fields,
                options.fdt_floor_dbm,
            )?;
            for &idx in members {
                stage3.insert(
                    idx,
                    Stage3Outcome {
                        fdt_index,
                        verdict: result.verdict,
                    },
                );
            }
            verification_log.push((fdt_index, result));
        }
    }

    let mut verdicts = Vec::with_capacity(dataset.len());
    for (i, report) in dataset.reports.iter().enumerate() {
        let stage1_anomalous = errors[i] > threshold;
        let s2 = stage2.get(&i).copied();
        let s3 = stage3.get(&i).cloned();
        let final_label = if !stage1_anomalous {
            Label::Normal
        } else if let Some(s3) = &s3 {
            match s3.verdict {
                FdtVerdict::OutageConfirmed => Label::RealOutage,
                FdtVerdict::AttackConfirmed => Label::Malicious,
            }
        } else if s2.map(|s| s.malicious).unwrap_or(false) {
            Label::Malicious
        } else {
            Label::RealOutage
        };
        verdicts.push(VerdictRecord {
            report_index: i,
            ue_id: report.ue_id,
            tick: report.tick,
            stage1_anomalous,
            reconstruction_error: errors[i],
            stage2: s2,
            stage3: s3,
            final_label,
        });
    }

    let metrics = summarize(dataset, &verdicts, verification_log.len());
    Ok((verdicts, metrics, verification_log))
}

fn empty_metrics() -> MetricsSummary {
    MetricsSummary {
        n_reports: 0,
        confusion: [[0; 3]; 3],
        per_class_error_rate: [0.0; 3],
        stage1_f1: 0.0,
        malicious_recall: 0.0,
        malicious_precision: 0.0,
        real_outage_misflag_rate: 0.0,
        ue_true_compromised: 0,
        ue_flagged_compromised: 0,
        ue_detected_compromised: 0,
        n_fdt_dispatches: 0,
    }
}

fn summarize(dataset: &Dataset, verdicts: &[VerdictRecord], n_dispatches: usize) -> MetricsSummary {
    let mut confusion = [[0usize; 3]; 3];
    for (r, v) in dataset.reports.iter().zip(verdicts.iter()) {
        confusion[r.label.code() as usize][v.final_label.code() as usize] += 1;
    }
    let mut per_class_error_rate = [0.0; 3];
    for class in 0..3 {
        let total: usize = confusion[class].iter().sum();
        if total > 0 {
            per_class_error_rate[class] =
                (total - confusion[class][class]) as f64 / total as f64;
        }
    }

    let truth_anomalous: Vec<bool> = dataset
        .reports
        .iter()
        .map(|r| r.label != Label::Normal)
        .collect();
    let stage1_flags: Vec<bool> = verdicts.iter().map(|v| v.stage1_anomalous).collect();
    let stage1_f1 = compute_metrics(&stage1_flags, &truth_anomalous)
        .map(|m| m.f1)
        .unwrap_or(0.0);

    let truth_malicious: Vec<bool> = dataset
        .reports
        .iter()
        .map(|r| r.label == Label::Malicious)
        .collect();
    let final_malicious: Vec<bool> = verdicts
        .iter()
        .map(|v| v.final_label == Label::Malicious)
        .collect();
    let m = compute_metrics(&final_malicious, &truth_malicious).expect("same length");

    let real_total: usize = confusion[1].iter().sum();
    let real_outage_misflag_rate = if real_total > 0 {
        confusion[1][2] as f64 / real_total as f64
    } else {
        0.0
    };

    // Per-UE view: a UE is compromised when any of its reports is.
    let mut true_ues = std::collections::BTreeSet::new();
    let mut flagged_ues = std::collections::BTreeSet::new();
    for (r, v) in dataset.reports.iter().zip(verdicts.iter()) {
        if r.label == Label::Malicious {
            true_ues.insert(r.ue_id);
        }
        if v.final_label == Label::Malicious {
            flagged_ues.insert(v.ue_id);
        }
    }
    let detected = true_ues.intersection(&flagged_ues).count();

    MetricsSummary {
        n_reports: dataset.len(),
        confusion,
        per_class_error_rate,
        stage1_f1,
        malicious_recall: m.recall,
        malicious_precision: m.precision,
        real_outage_misflag_rate,
        ue_true_compromised: true_ues.len(),
        ue_flagged_compromised: flagged_ues.len(),
        ue_detected_compromised: detected,
        n_fdt_dispatches: n_dispatches,
    }
}

/// `ue_id,tick,stage1,stage2,final` CSV of per-report verdicts.
pub fn verdicts_to_csv(verdicts: &[VerdictRecord]) -> String {
    let mut out = String::from("ue_id,tick,stage1,stage2,final\n");
    for v in verdicts {
        let stage1 = if v.stage1_anomalous { "anomalous" } else { "normal" };
        let stage2 = match &v.stage2 {
            None => "-".to_string(),
            Some(s) => if s.malicious { "malicious" } else { "real_outage" }.to_string(),
        };
        let _ = writeln!(out, "{},{},{},{},{}", v.ue_id, v.tick, stage1, stage2, v.final_label);
    }
    out
}

/// `metric,value` CSV of the summary.
pub fn metrics_to_csv(m: &MetricsSummary) -> String {
    let mut out = String::from("metric,value\n");
    let mut push = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    push("n_reports", m.n_reports.to_string());
    for truth in 0..3 {
        for fin in 0..3 {
            push(
                &format!("confusion_{}_{}", class_name(truth), class_name(fin)),
                m.confusion[truth][fin].to_string(),
            );
        }
    }
    for class in 0..3 {
        push(
            &format!("error_rate_{}", class_name(class)),
            format!("{:.6}", m.per_class_error_rate[class]),
        );
    }
    push("stage1_f1", format!("{:.6}", m.stage1_f1));
    push("malicious_recall", format!("{:.6}", m.malicious_recall));
    push("malicious_precision", format!("{:.6}", m.malicious_precision));
    push(
        "real_outage_misflag_rate",
        format!("{:.6}", m.real_outage_misflag_rate),
    );
    push("ue_true_compromised", m.ue_true_compromised.to_string());
    push("ue_flagged_compromised", m.ue_flagged_compromised.to_string());
    push("ue_detected_compromised", m.ue_detected_compromised.to_string());
    push("n_fdt_dispatches", m.n_fdt_dispatches.to_string());
    out
}

fn class_name(code: usize) -> &'static str {
    match code {
        0 => "normal",
        1 => "real_outage",
        _ => "malicious",
    }
}

// ---------------------------------------------------------------------------
// Guarded SON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonRunConfig {
    pub trigger: TriggerConfig,
    pub power_boost_db: f64,
    pub n_compensating: usize,
    pub coverage_threshold_db: f64,
}

impl Default for SonRunConfig {
    fn default() -> Self {
        SonRunConfig {
            trigger: TriggerConfig::default(),
            power_boost_db: 3.0,
            n_compensating: 3,
            coverage_threshold_db: crate::son::COVERAGE_SINR_THRESHOLD_DB,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GuardedSonOutcome {
    pub suspected: Vec<u32>,
    pub actions: Vec<CocAction>,
    pub layout_after: NetworkLayout,
    pub kpi_before: KpiSummary,
    pub kpi_after: KpiSummary,
    pub coc_fired: bool,
    /// Screening quality when a guard ran.
    pub mrif_metrics: Option<MetricsSummary>,
}

/// Feeds the engine either the raw report stream (`guard` = None) or only the
/// reports the screen cleared. `base_layout` is the engine's site knowledge
/// (pre-outage, for the geographic partition); `current_layout` is the true
/// network state the KPIs and compensations act on.
pub fn run_guarded_son(
    dataset: &Dataset,
    base_layout: &NetworkLayout,
    current_layout: &NetworkLayout,
    fields: &SiteFields,
    eval_indices: &[usize],
    config: &SonRunConfig,
    guard: Option<(&ModelBundle, &MrifOptions)>,
) -> Result<GuardedSonOutcome> {
    let mut mrif_metrics = None;
    let cleared: Vec<MdtReport> = match guard {
        None => dataset.reports.clone(),
        Some((bundle, options)) => {
            let (verdicts, metrics, _) = run_mrif(dataset, bundle, options, None)?;
            mrif_metrics = Some(metrics);
            dataset
                .reports
                .iter()
                .zip(verdicts.iter())
                .filter(|(_, v)| v.final_label != Label::Malicious)
                .map(|(r, _)| r.clone())
                .collect()
        }
    };

    let suspected = trigger_outage_detection(&cleared, base_layout, &config.trigger);
    let mut engine = SonEngine::new(current_layout.clone());
    for &cell in &suspected {
        let compensating =
            nearest_neighbor_cells(engine.layout(), cell, config.n_compensating)?;
        engine.apply(CocAction {
            outage_cell: cell,
            compensating_cells: compensating,
            power_boost_db: config.power_boost_db,
        })?;
    }

    let kpi_before = evaluate_kpis(
        current_layout,
        fields,
        eval_indices,
        config.coverage_threshold_db,
    )?;
    let kpi_after = evaluate_kpis(
        engine.layout(),
        fields,
        eval_indices,
        config.coverage_threshold_db,
    )?;
    Ok(GuardedSonOutcome {
        suspected,
        actions: engine.actions().to_vec(),
        layout_after: engine.layout().clone(),
        kpi_before,
        kpi_after,
        coc_fired: !engine.actions().is_empty(),
        mrif_metrics,
    })
}

pub const SUMMARY_CSV_HEADER: &str =
    "scenario,guard,detected_malicious,missed_malicious,false_malicious,coc_fired,mean_sinr_db,p05_sinr_db";

/// One end-to-end summary row. `metrics` is absent for the unguarded engine.
pub fn summary_csv_row(
    scenario: &str,
    guard: &str,
    metrics: Option<&MetricsSummary>,
    outcome: &GuardedSonOutcome,
) -> String {
    let (detected, missed, false_pos) = match metrics {
        Some(m) => {
            let detected = m.confusion[2][2];
            let total_malicious: usize = m.confusion[2].iter().sum();
            let false_pos = m.confusion[0][2] + m.confusion[1][2];
            (detected, total_malicious - detected, false_pos)
        }
        None => (0, 0, 0),
    };
    format!(
        "{},{},{},{},{},{},{:.6},{:.6}",
        scenario,
        guard,
        detected,
        missed,
        false_pos,
        outcome.coc_fired,
        outcome.kpi_after.mean_sinr_db,
        outcome.kpi_after.p05_sinr_db
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{inject_malicious, AttackSpec, ForgeStrategy, OutageValueModel, TargetRegion};
    use crate::fdt::place_fdts;
    use crate::geometry::Point;
    use crate::scenario::{build_env, generate_reports, generate_reports_in_env};
    use crate::testutil::small_config;

    fn quick_train_opts(seed: u64) -> TrainOptions {
        TrainOptions {
            ae: AeConfig {
                epochs: 25,
                ..AeConfig::default()
            },
            gbt: GbtConfig {
                n_rounds: 20,
                ..GbtConfig::default()
            },
            seed,
            ..TrainOptions::default()
        }
    }

    #[test]
    fn clean_data_yields_all_normal_with_zero_false_alarms() {
        let cfg = small_config(300, 600, vec![], 1);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let (bundle, report) = train_models(&ds, &quick_train_opts(1)).unwrap();
        assert_eq!(report.skipped.len(), 2, "gbt and lof skipped on clean data");
        let (verdicts, metrics, _) =
            run_mrif(&ds, &bundle, &MrifOptions::default(), None).unwrap();
        assert_eq!(verdicts.len(), ds.len());
        assert!(verdicts.iter().all(|v| v.final_label == Label::Normal));
        assert_eq!(metrics.confusion[0][1] + metrics.confusion[0][2], 0);
    }

    #[test]
    fn verdict_completeness_and_stage_coupling() {
        let cfg = small_config(400, 1000, vec![0, 4], 2);
        let (clean, _) = generate_reports(&cfg).unwrap();
        let model = OutageValueModel::fit(&clean).unwrap();
        let spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.05, 3);
        let ds = inject_malicious(&clean, &spec, Some(&model)).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(2)).unwrap();
        let (verdicts, metrics, _) =
            run_mrif(&ds, &bundle, &MrifOptions::default(), None).unwrap();
        assert_eq!(verdicts.len(), ds.len(), "every report gets exactly one verdict");
        for v in &verdicts {
            assert_eq!(v.stage2.is_some(), v.stage1_anomalous);
            if !v.stage1_anomalous {
                assert_eq!(v.final_label, Label::Normal);
            }
        }
        assert!(metrics.stage1_f1 > 0.5, "smoke: stage 1 mostly works");
    }

    #[test]
    fn digest_mismatch_is_a_compatibility_error() {
        let cfg = small_config(300, 600, vec![0], 3);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(3)).unwrap();
        let other_cfg = small_config(300, 600, vec![0], 4);
        let (other, _) = generate_reports(&other_cfg).unwrap();
        assert!(matches!(
            run_mrif(&other, &bundle, &MrifOptions::default(), None),
            Err(Error::Compatibility(_))
        ));
        // Opting out of the check allows cross-evaluation.
        let opts = MrifOptions {
            check_digest: false,
            ..MrifOptions::default()
        };
        assert!(run_mrif(&other, &bundle, &opts, None).is_ok());
    }

    #[test]
    fn bundle_round_trips_through_json() {
        let cfg = small_config(300, 600, vec![0], 5);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(5)).unwrap();
        let json = bundle.to_json().unwrap();
        let back = ModelBundle::from_json(&json).unwrap();
        assert_eq!(bundle, back);
        assert_eq!(bundle.digest().unwrap(), back.digest().unwrap());
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = small_config(300, 700, vec![0], 6);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let (a, ra) = train_models(&ds, &quick_train_opts(6)).unwrap();
        let (b, rb) = train_models(&ds, &quick_train_opts(6)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.bundle_digest, rb.bundle_digest);
    }

    #[test]
    fn guard_is_a_no_op_on_clean_data() {
        let cfg = small_config(400, 800, vec![], 7);
        let env = build_env(&cfg, &[]).unwrap();
        let ds = generate_reports_in_env(&cfg, &env).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(7)).unwrap();
        let son_cfg = SonRunConfig::default();
        let indices = env.ue_indices();
        let unguarded = run_guarded_son(
            &ds,
            &cfg.layout,
            &cfg.layout,
            &env.fields,
            &indices,
            &son_cfg,
            None,
        )
        .unwrap();
        let guarded = run_guarded_son(
            &ds,
            &cfg.layout,
            &cfg.layout,
            &env.fields,
            &indices,
            &son_cfg,
            Some((&bundle, &MrifOptions::default())),
        )
        .unwrap();
        assert!(!unguarded.coc_fired);
        assert!(!guarded.coc_fired);
        assert_eq!(unguarded.kpi_after, guarded.kpi_after);
    }

    #[test]
    fn fake_attack_fires_ungated_engine_and_guard_blocks_it() {
        // Attack-only scenario; the guard's models come from a companion run
        // with a real outage (the screen needs real-outage training data).
        let train_cfg = small_config(700, 2100, vec![0], 8);
        let (train_clean, _) = generate_reports(&train_cfg).unwrap();
        let model = OutageValueModel::fit(&train_clean).unwrap();
        let train_spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.01, 8);
        let train_ds = inject_malicious(&train_clean, &train_spec, Some(&model)).unwrap();
        let (bundle, _) = train_models(&train_ds, &quick_train_opts(8)).unwrap();
        assert!(bundle.lof.is_some());

        let attack_cfg = small_config(700, 2100, vec![], 9);
        let env = build_env(&attack_cfg, &[]).unwrap();
        let clean = generate_reports_in_env(&attack_cfg, &env).unwrap();
        let mut spec = AttackSpec::new(ForgeStrategy::ForgeLowRsrp, 0.01, 9);
        spec.target_region = Some(TargetRegion {
            center: Point::new(833.3, 833.3),
            radius_m: 150.0,
        });
        let attacked = inject_malicious(&clean, &spec, None).unwrap();

        let son_cfg = SonRunConfig::default();
        let indices = env.ue_indices();
        let baseline = evaluate_kpis(
            &attack_cfg.layout,
            &env.fields,
            &indices,
            son_cfg.coverage_threshold_db,
        )
        .unwrap();

        let ungated = run_guarded_son(
            &attacked,
            &attack_cfg.layout,
            &attack_cfg.layout,
            &env.fields,
            &indices,
            &son_cfg,
            None,
        )
        .unwrap();
        assert!(ungated.coc_fired, "the trusting engine falls for the attack");
        assert!(
            ungated.kpi_after.mean_sinr_db < baseline.mean_sinr_db,
            "needless compensation degrades the network"
        );

        let opts = MrifOptions {
            check_digest: false,
            anomaly_ratio: Some(0.02),
            ..MrifOptions::default()
        };
        let guarded = run_guarded_son(
            &attacked,
            &attack_cfg.layout,
            &attack_cfg.layout,
            &env.fields,
            &indices,
            &son_cfg,
            Some((&bundle, &opts)),
        )
        .unwrap();
        assert!(!guarded.coc_fired, "the screen starves the false trigger");
        assert_eq!(guarded.kpi_after, baseline, "guarded KPIs equal the baseline");

        // Guard monotonicity: guarded triggers are a subset of ungated ones.
        assert!(guarded
            .suspected
            .iter()
            .all(|c| ungated.suspected.contains(c)));
    }

    #[test]
    fn fdt_overrides_sparse_malicious_cells() {
        let cfg = small_config(600, 1800, vec![0], 10);
        let env = build_env(&cfg, &[]).unwrap();
        let clean = generate_reports_in_env(&cfg, &env).unwrap();
        let model = OutageValueModel::fit(&clean).unwrap();
        let spec = AttackSpec::new(ForgeStrategy::MimicOutageDistribution, 0.01, 10);
        let ds = inject_malicious(&clean, &spec, Some(&model)).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(10)).unwrap();

        let degraded = cfg.layout.with_outage(&cfg.outage_cells).unwrap();
        let sites: Vec<Point> = cfg.layout.sites.iter().map(|s| s.position).collect();
        let fleet = place_fdts(&sites, 3, &cfg.layout.area, 10.0).unwrap();
        let context = FdtContext {
            layout: &degraded,
            fields: &env.fields,
            fleet: &fleet,
        };
        let options = MrifOptions {
            use_fdt: true,
            ..MrifOptions::default()
        };
        let (verdicts, metrics, log) = run_mrif(&ds, &bundle, &options, Some(&context)).unwrap();
        assert!(metrics.n_fdt_dispatches > 0, "sparse cells get visited");
        assert!(!log.is_empty());
        // Every fdt-visited malicious report ends malicious: the forged
        // locations have genuinely good coverage.
        for v in &verdicts {
            if let Some(s3) = &v.stage3 {
                let truth = ds.reports[v.report_index].label;
                if truth == Label::Malicious {
                    assert_eq!(s3.verdict, FdtVerdict::AttackConfirmed);
                    assert_eq!(v.final_label, Label::Malicious);
                }
            }
        }
    }

    #[test]
    fn csv_emitters_render() {
        let cfg = small_config(300, 600, vec![0], 11);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let (bundle, _) = train_models(&ds, &quick_train_opts(11)).unwrap();
        let (verdicts, metrics, _) =
            run_mrif(&ds, &bundle, &MrifOptions::default(), None).unwrap();
        let v_csv = verdicts_to_csv(&verdicts);
        assert_eq!(v_csv.lines().count(), ds.len() + 1);
        let m_csv = metrics_to_csv(&metrics);
        assert!(m_csv.contains("malicious_recall"));
        assert!(m_csv.starts_with("metric,value\n"));
    }
}
