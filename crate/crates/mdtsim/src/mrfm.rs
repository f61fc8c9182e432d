//! Malicious Reports Filtering Module.
//!
//! Separates forged outage reports from genuine ones among anomaly-flagged
//! reports. Genuine outages are geographically collocated (shadowing is
//! correlated over tens of metres, so neighbors of a dead cell all see it),
//! while forged reports come from scattered healthy locations. Two mechanisms
//! exploit this:
//!
//! - A Local Outlier Factor model fit on real-outage reports in a feature
//!   space of scaled position plus PCA-projected measurements; queries whose
//!   score exceeds the contamination-quantile frontier are malicious.
//! - The regional neighbor-count rule: a flagged report with fewer than `eta`
//!   flagged neighbors within a radius manifests an attack.
//!
//! LOF follows the textbook definition: tie-inclusive k-neighborhoods,
//! reachability distances floored at a small epsilon so duplicate points
//! (repeated reports from a stationary UE) keep densities finite.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adversary::{sweep_malicious_rate, AttackSpec};
use crate::error::{Error, Result};
use crate::learn::{
    pca_fit, pca_project, quantile_interpolated, standardize_apply, standardize_fit,
    FeatureMatrix, PcaBasis, StandardizeParams,
};
use crate::scenario::{Dataset, Label, MdtReport, FEATURE_COLS};

/// Floor on reachability distances; keeps duplicate-point densities finite.
pub const REACHABILITY_EPSILON: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Core LOF machinery
// ---------------------------------------------------------------------------

/// Precomputed neighborhood statistics of a reference point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofIndex {
    points: FeatureMatrix,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl LofIndex {
    /// Builds the index; needs `k < reference.rows()`.
    pub fn build(reference: FeatureMatrix, k: usize) -> Result<LofIndex> {
        let n = reference.rows();
        if k == 0 || k >= n {
            return Err(Error::InvalidInput(format!(
                "LOF needs 0 < k < reference size, got k={k}, n={n}"
            )));
        }
        // k-distance per point, neighbors excluding the point itself (by index).
        let mut dist = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = euclidean(reference.row(i), reference.row(j));
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut k_distance = vec![0.0f64; n];
        for i in 0..n {
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i * n + j]).collect();
            others.sort_by(|a, b| a.partial_cmp(b).unwrap());
            k_distance[i] = others[k - 1];
        }
        // Local reachability density with tie-inclusive neighborhoods.
        let mut lrd = vec![0.0f64; n];
        for i in 0..n {
            let mut reach_sum = 0.0;
            let mut count = 0usize;
            for j in 0..n {
                if j == i || dist[i * n + j] > k_distance[i] {
                    continue;
                }
                reach_sum += dist[i * n + j].max(k_distance[j]).max(REACHABILITY_EPSILON);
                count += 1;
            }
            lrd[i] = count as f64 / reach_sum;
        }
        Ok(LofIndex {
            points: reference,
            k,
            k_distance,
            lrd,
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    /// LOF of an external query point against the reference set.
    pub fn score(&self, query: &[f64]) -> f64 {
        let n = self.points.rows();
        let dists: Vec<f64> = (0..n).map(|j| euclidean(query, self.points.row(j))).collect();
        let mut sorted = dists.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let kdist_q = sorted[self.k - 1];

        let mut reach_sum = 0.0;
        let mut lrd_sum = 0.0;
        let mut count = 0usize;
        for j in 0..n {
            if dists[j] > kdist_q {
                continue;
            }
            reach_sum += dists[j].max(self.k_distance[j]).max(REACHABILITY_EPSILON);
            lrd_sum += self.lrd[j];
            count += 1;
        }
        let lrd_q = count as f64 / reach_sum;
        lrd_sum / count as f64 / lrd_q
    }

    /// Leave-self-out LOF of every reference point (its training self-score).
    pub fn self_scores(&self) -> Vec<f64> {
        let n = self.points.rows();
        (0..n)
            .map(|i| {
                let mut reach_sum = 0.0;
                let mut lrd_sum = 0.0;
                let mut count = 0usize;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let d = euclidean(self.points.row(i), self.points.row(j));
                    if d > self.k_distance[i] {
                        continue;
                    }
                    reach_sum += d.max(self.k_distance[j]).max(REACHABILITY_EPSILON);
                    lrd_sum += self.lrd[j];
                    count += 1;
                }
                let lrd_i = count as f64 / reach_sum;
                lrd_sum / count as f64 / lrd_i
            })
            .collect()
    }
}

/// LOF of `query` against `reference` with `k` neighbors (builds a throwaway
/// index; use [`LofIndex`] to score many queries).
pub fn lof_score(reference: &FeatureMatrix, query: &[f64], k: usize) -> Result<f64> {
    Ok(LofIndex::build(reference.clone(), k)?.score(query))
}

// ---------------------------------------------------------------------------
// Report-level model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LofParams {
    pub n_neighbors: usize,
    /// Assumed outlier share of the training set; sets the frontier quantile.
    pub contamination: f64,
    /// PCA components of the 14 measurement dims appended to scaled position.
    pub pca_k: usize,
}

impl Default for LofParams {
    fn default() -> Self {
        LofParams {
            n_neighbors: 15,
            contamination: 0.15,
            pca_k: 2,
        }
    }
}

/// Fitted filtering model: feature pipeline plus frontier threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofModel {
    pub params: LofParams,
    measurement_scaler: StandardizeParams,
    pca: PcaBasis,
    /// Position mean/scale and per-component scale bring every distance
    /// dimension to unit training variance; otherwise metres would dominate.
    position_mean: [f64; 2],
    position_scale: [f64; 2],
    component_scale: Vec<f64>,
    index: LofIndex,
    pub decision_threshold: f64,
}

fn measurement_matrix(reports: &[&MdtReport]) -> FeatureMatrix {
    let mut data = Vec::with_capacity(reports.len() * (FEATURE_COLS - 2));
    for r in reports {
        data.extend_from_slice(&r.features()[2..]);
    }
    FeatureMatrix::new(reports.len(), FEATURE_COLS - 2, data).expect("finite features")
}

fn column_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let s = var.sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

impl LofModel {
    fn transform(&self, report: &MdtReport) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 + self.params.pca_k);
        row.push((report.position.x_m - self.position_mean[0]) / self.position_scale[0]);
        row.push((report.position.y_m - self.position_mean[1]) / self.position_scale[1]);
        if self.params.pca_k > 0 {
            let m = measurement_matrix(&[report]);
            let std = standardize_apply(&m, &self.measurement_scaler);
            let proj = pca_project(&self.pca, &std).expect("matching columns");
            for (c, scale) in self.component_scale.iter().enumerate() {
                row.push(proj.get(0, c) / scale);
            }
        }
        row
    }
}

/// Fits the LOF frontier on real-outage training reports.
pub fn mrfm_fit(real_outage_training: &[&MdtReport], params: &LofParams) -> Result<LofModel> {
    let n = real_outage_training.len();
    if n < params.n_neighbors + 1 {
        return Err(Error::Fit(format!(
            "LOF fit needs >= {} real-outage reports, got {n}",
            params.n_neighbors + 1
        )));
    }
    if !(0.0 < params.contamination && params.contamination < 0.5) {
        return Err(Error::Fit(format!(
            "contamination must lie in (0, 0.5), got {}",
            params.contamination
        )));
    }

    let measurements = measurement_matrix(real_outage_training);
    let (standardized, measurement_scaler) = {
        let scaler = standardize_fit(&measurements);
        (standardize_apply(&measurements, &scaler), scaler)
    };
    let pca = pca_fit(&standardized, params.pca_k)?;
    let projected = pca_project(&pca, &standardized)?;
    let component_scale: Vec<f64> = (0..params.pca_k)
        .map(|c| column_std((0..n).map(|r| projected.get(r, c)), n))
        .collect();

    let xs: Vec<f64> = real_outage_training.iter().map(|r| r.position.x_m).collect();
    let ys: Vec<f64> = real_outage_training.iter().map(|r| r.position.y_m).collect();
    let position_mean = [
        xs.iter().sum::<f64>() / n as f64,
        ys.iter().sum::<f64>() / n as f64,
    ];
    let position_scale = [
        column_std(xs.iter().cloned(), n),
        column_std(ys.iter().cloned(), n),
    ];

    let mut reference = Vec::with_capacity(n * (2 + params.pca_k));
    for (i, r) in real_outage_training.iter().enumerate() {
        reference.push((r.position.x_m - position_mean[0]) / position_scale[0]);
        reference.push((r.position.y_m - position_mean[1]) / position_scale[1]);
        for (c, scale) in component_scale.iter().enumerate() {
            reference.push(projected.get(i, c) / scale);
        }
    }
    let reference = FeatureMatrix::new(n, 2 + params.pca_k, reference)?;
    let index = LofIndex::build(reference, params.n_neighbors)?;

    // Frontier: the (1 - contamination) quantile of leave-self-out scores, so
    // a contamination share of the training set sits outside it.
    let self_scores = index.self_scores();
    let decision_threshold = quantile_interpolated(&self_scores, 1.0 - params.contamination)?;

    Ok(LofModel {
        params: *params,
        measurement_scaler,
        pca,
        position_mean,
        position_scale,
        component_scale,
        index,
        decision_threshold,
    })
}

/// Stage-2 outcome of one flagged report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LofOutcome {
    pub malicious: bool,
    pub lof_score: f64,
}

/// Classifies flagged reports: malicious iff the LOF score exceeds the
/// frontier. Each verdict depends only on the model, never on batch peers.
pub fn mrfm_classify(model: &LofModel, flagged: &[&MdtReport]) -> Vec<LofOutcome> {
    flagged
        .iter()
        .map(|r| {
            let score = model.index.score(&model.transform(r));
            LofOutcome {
                malicious: score > model.decision_threshold,
                lof_score: score,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Regional neighbor-count rule
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionalRule {
    /// Minimum flagged neighbors for a genuine outage.
    pub eta: usize,
    pub region_radius_m: f64,
}

impl Default for RegionalRule {
    fn default() -> Self {
        RegionalRule {
            eta: 10,
            region_radius_m: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionalOutcome {
    pub malicious: bool,
    pub neighbor_count: usize,
}

/// A real outage cannot be an isolated event: a flagged report with fewer than
/// `eta` other flagged reports within the region radius manifests an attack.
pub fn regional_count_rule(flagged: &[&MdtReport], rule: &RegionalRule) -> Vec<RegionalOutcome> {
    let n = flagged.len();
    (0..n)
        .map(|i| {
            let count = (0..n)
                .filter(|&j| {
                    j != i
                        && flagged[i].position.distance(&flagged[j].position)
                            <= rule.region_radius_m
                })
                .count();
            RegionalOutcome {
                malicious: count < rule.eta,
                neighbor_count: count,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fake-rate sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub fake_rate: f64,
    pub real_error_rate: f64,
    pub fake_error_rate: f64,
}

/// Sweeps the forged-report rate over a fixed base scenario. The frontier is
/// fit once on the base real outages (it cannot depend on fake reports), then
/// every rate's outage-class reports are classified against it. Stage-1
/// detection is taken as ground truth here so the filter is measured in
/// isolation.
pub fn mrfm_sweep(
    base: &Dataset,
    rates: &[f64],
    attack: &AttackSpec,
    params: &LofParams,
) -> Result<Vec<SweepPoint>> {
    let real_reports: Vec<&MdtReport> = base
        .reports
        .iter()
        .filter(|r| r.label == Label::RealOutage)
        .collect();
    let model = mrfm_fit(&real_reports, params)?;

    let datasets = sweep_malicious_rate(base, rates, attack)?;
    let mut out = Vec::with_capacity(rates.len());
    for (rate, ds) in rates.iter().zip(datasets.iter()) {
        let flagged: Vec<&MdtReport> = ds
            .reports
            .iter()
            .filter(|r| r.label != Label::Normal)
            .collect();
        let outcomes = mrfm_classify(&model, &flagged);
        let mut real_total = 0usize;
        let mut real_wrong = 0usize;
        let mut fake_total = 0usize;
        let mut fake_wrong = 0usize;
        for (r, o) in flagged.iter().zip(outcomes.iter()) {
            match r.label {
                Label::RealOutage => {
                    real_total += 1;
                    if o.malicious {
                        real_wrong += 1;
                    }
                }
                Label::Malicious => {
                    fake_total += 1;
                    if !o.malicious {
                        fake_wrong += 1;
                    }
                }
                Label::Normal => unreachable!(),
            }
        }
        out.push(SweepPoint {
            fake_rate: *rate,
            real_error_rate: real_wrong as f64 / real_total.max(1) as f64,
            fake_error_rate: fake_wrong as f64 / fake_total.max(1) as f64,
        });
    }
    Ok(out)
}

/// `fake_rate,real_error_rate,fake_error_rate` CSV.
pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("fake_rate,real_error_rate,fake_error_rate\n");
    for p in points {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6}",
            p.fake_rate, p.real_error_rate, p.fake_error_rate
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn matrix_from_points(points: &[(f64, f64)]) -> FeatureMatrix {
        let data: Vec<f64> = points.iter().flat_map(|(x, y)| [*x, *y]).collect();
        FeatureMatrix::new(points.len(), 2, data).unwrap()
    }

    fn lattice_10x10() -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push((i as f64, j as f64));
            }
        }
        pts
    }

    /// Direct transcription of the LOF definition for the oracle.
    fn brute_force_lof(reference: &FeatureMatrix, query: &[f64], k: usize) -> f64 {
        let n = reference.rows();
        let d = |a: &[f64], b: &[f64]| euclidean(a, b);

        let kdist = |p: &[f64], exclude: Option<usize>| -> f64 {
            let mut ds: Vec<f64> = (0..n)
                .filter(|&j| Some(j) != exclude)
                .map(|j| d(p, reference.row(j)))
                .collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ds[k - 1]
        };
        let neighborhood = |p: &[f64], exclude: Option<usize>| -> Vec<usize> {
            let kd = kdist(p, exclude);
            (0..n)
                .filter(|&j| Some(j) != exclude && d(p, reference.row(j)) <= kd)
                .collect()
        };
        let lrd = |p: &[f64], exclude: Option<usize>| -> f64 {
            let hood = neighborhood(p, exclude);
            let sum: f64 = hood
                .iter()
                .map(|&o| {
                    d(p, reference.row(o))
                        .max(kdist(reference.row(o), Some(o)))
                        .max(REACHABILITY_EPSILON)
                })
                .sum();
            hood.len() as f64 / sum
        };

        let hood = neighborhood(query, None);
        let lrd_q = lrd(query, None);
        let mean_lrd: f64 = hood
            .iter()
            .map(|&o| lrd(reference.row(o), Some(o)))
            .sum::<f64>()
            / hood.len() as f64;
        mean_lrd / lrd_q
    }

    #[test]
    fn inlier_on_lattice_scores_near_one() {
        let reference = matrix_from_points(&lattice_10x10());
        let score = lof_score(&reference, &[4.0, 5.0], 5).unwrap();
        assert!(
            (0.9..=1.1).contains(&score),
            "duplicated lattice point must be an inlier, LOF = {score}"
        );
    }

    #[test]
    fn far_away_query_is_a_strong_outlier() {
        let reference = matrix_from_points(&lattice_10x10());
        // Lattice diameter ~ 12.7; query at ~100x that distance.
        let score = lof_score(&reference, &[1300.0, 0.0], 5).unwrap();
        assert!(score > 10.0, "distant point must score way above 1, got {score}");
    }

    #[test]
    fn identical_reference_and_query_score_one() {
        let reference = matrix_from_points(&vec![(2.0, 2.0); 20]);
        let score = lof_score(&reference, &[2.0, 2.0], 5).unwrap();
        assert!(
            (score - 1.0).abs() < 1e-9,
            "epsilon floor keeps degenerate densities tied, got {score}"
        );
    }

    #[test]
    fn matches_brute_force_definition() {
        // Random clusters + stragglers, n <= 200, agreement to 1e-9.
        let mut rng = crate::rng::seeded(5, 31);
        let mut pts = Vec::new();
        for c in 0..4 {
            let cx = (c % 2) as f64 * 10.0;
            let cy = (c / 2) as f64 * 10.0;
            for _ in 0..45 {
                pts.push((
                    cx + rand::Rng::random::<f64>(&mut rng) * 2.0,
                    cy + rand::Rng::random::<f64>(&mut rng) * 2.0,
                ));
            }
        }
        let reference = matrix_from_points(&pts);
        let index = LofIndex::build(reference.clone(), 7).unwrap();
        for query in [
            [0.5, 0.5],
            [10.7, 0.2],
            [5.0, 5.0],
            [30.0, -10.0],
            [0.0, 10.0],
        ] {
            let fast = index.score(&query);
            let brute = brute_force_lof(&reference, &query, 7);
            assert!(
                (fast - brute).abs() < 1e-9,
                "optimized vs definitional LOF: {fast} vs {brute}"
            );
        }
    }

    #[test]
    fn rigid_motions_leave_scores_unchanged() {
        let mut rng = crate::rng::seeded(6, 32);
        let pts: Vec<(f64, f64)> = (0..60)
            .map(|_| {
                (
                    rand::Rng::random::<f64>(&mut rng) * 8.0,
                    rand::Rng::random::<f64>(&mut rng) * 8.0,
                )
            })
            .collect();
        let query = [3.0, 17.0];
        let base = lof_score(&matrix_from_points(&pts), &query, 6).unwrap();

        let (theta, tx, ty) = (0.7f64, 40.0, -12.0);
        let rot = |x: f64, y: f64| {
            (
                theta.cos() * x - theta.sin() * y + tx,
                theta.sin() * x + theta.cos() * y + ty,
            )
        };
        let moved: Vec<(f64, f64)> = pts.iter().map(|(x, y)| rot(*x, *y)).collect();
        let moved_query = rot(query[0], query[1]);
        let transformed = lof_score(
            &matrix_from_points(&moved),
            &[moved_query.0, moved_query.1],
            6,
        )
        .unwrap();
        assert!(
            (base - transformed).abs() < 1e-9,
            "LOF must be invariant to rigid motions: {base} vs {transformed}"
        );
    }

    // --- report-level fixtures ------------------------------------------------

    fn report_at(x: f64, y: f64, rsrp: f64, label: Label) -> MdtReport {
        MdtReport {
            ue_id: 0,
            tick: 0,
            position: Point::new(x, y),
            serving_cell: 0,
            serving_rsrp_dbm: rsrp,
            serving_rsrq_db: -15.0,
            neighbor_rsrp_dbm: [rsrp - 2.0, rsrp - 3.0, rsrp - 4.0, rsrp - 5.0, rsrp - 6.0, rsrp - 7.0],
            neighbor_rsrq_db: [-16.0, -17.0, -18.0, -19.0, -20.0, -21.0],
            label,
        }
    }

    fn outage_cluster(n: usize, cx: f64, cy: f64, seed: u64) -> Vec<MdtReport> {
        let mut rng = crate::rng::seeded(seed, 33);
        (0..n)
            .map(|_| {
                let x = cx + (rand::Rng::random::<f64>(&mut rng) - 0.5) * 150.0;
                let y = cy + (rand::Rng::random::<f64>(&mut rng) - 0.5) * 150.0;
                let rsrp = -112.0 + (rand::Rng::random::<f64>(&mut rng) - 0.5) * 8.0;
                report_at(x, y, rsrp, Label::RealOutage)
            })
            .collect()
    }

    #[test]
    fn fit_frontier_leaves_contamination_share_outside() {
        let training = outage_cluster(200, 500.0, 500.0, 1);
        let refs: Vec<&MdtReport> = training.iter().collect();
        let model = mrfm_fit(&refs, &LofParams::default()).unwrap();
        let outcomes = mrfm_classify(&model, &refs);
        let outside = outcomes.iter().filter(|o| o.malicious).count();
        assert!(
            (25..=35).contains(&outside),
            "~15% of 200 training points outside their own frontier, got {outside}"
        );
    }

    #[test]
    fn geography_only_model_works_with_pca_k_zero() {
        let training = outage_cluster(100, 300.0, 300.0, 2);
        let refs: Vec<&MdtReport> = training.iter().collect();
        let params = LofParams {
            pca_k: 0,
            ..LofParams::default()
        };
        let model = mrfm_fit(&refs, &params).unwrap();
        let inside = report_at(300.0, 300.0, -112.0, Label::Malicious);
        let outside = report_at(900.0, 80.0, -112.0, Label::Malicious);
        let outcomes = mrfm_classify(&model, &[&inside, &outside]);
        assert!(!outcomes[0].malicious, "geographically inside => real");
        assert!(outcomes[1].malicious, "geographically isolated => malicious");
    }

    #[test]
    fn refit_is_deterministic() {
        let training = outage_cluster(80, 400.0, 600.0, 3);
        let refs: Vec<&MdtReport> = training.iter().collect();
        let a = mrfm_fit(&refs, &LofParams::default()).unwrap();
        let b = mrfm_fit(&refs, &LofParams::default()).unwrap();
        assert_eq!(a.decision_threshold, b.decision_threshold);
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_training_reports_is_a_fit_error() {
        let training = outage_cluster(10, 100.0, 100.0, 4);
        let refs: Vec<&MdtReport> = training.iter().collect();
        assert!(matches!(
            mrfm_fit(&refs, &LofParams::default()),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn cluster_member_is_real_and_isolated_query_is_malicious() {
        let training = outage_cluster(150, 250.0, 700.0, 5);
        let refs: Vec<&MdtReport> = training.iter().collect();
        let model = mrfm_fit(&refs, &LofParams::default()).unwrap();
        // Inside the cluster, with cluster-like measurements.
        let inside = report_at(250.0, 705.0, -112.0, Label::Malicious);
        // Far away, healthy location forging outage-like values.
        let isolated = report_at(850.0, 120.0, -113.0, Label::Malicious);
        let outcomes = mrfm_classify(&model, &[&inside, &isolated]);
        assert!(!outcomes[0].malicious);
        assert!(outcomes[1].malicious);
        assert!(outcomes[1].lof_score > outcomes[0].lof_score);
    }

    #[test]
    fn classify_of_empty_set_is_empty() {
        let training = outage_cluster(60, 100.0, 100.0, 6);
        let refs: Vec<&MdtReport> = training.iter().collect();
        let model = mrfm_fit(&refs, &LofParams::default()).unwrap();
        assert!(mrfm_classify(&model, &[]).is_empty());
    }

    #[test]
    fn regional_rule_confirms_dense_clusters() {
        // 12 flagged reports inside one radius: all real.
        let reports: Vec<MdtReport> = (0..12)
            .map(|i| report_at(500.0 + i as f64 * 5.0, 500.0, -110.0, Label::RealOutage))
            .collect();
        let refs: Vec<&MdtReport> = reports.iter().collect();
        let outcomes = regional_count_rule(&refs, &RegionalRule::default());
        assert!(outcomes.iter().all(|o| !o.malicious));
        assert!(outcomes.iter().all(|o| o.neighbor_count == 11));
    }

    #[test]
    fn regional_rule_flags_isolated_reports() {
        let reports = [
            report_at(100.0, 100.0, -110.0, Label::Malicious),
            report_at(500.0, 500.0, -110.0, Label::Malicious),
            report_at(900.0, 900.0, -110.0, Label::Malicious),
        ];
        let refs: Vec<&MdtReport> = reports.iter().collect();
        let outcomes = regional_count_rule(&refs, &RegionalRule::default());
        assert!(outcomes.iter().all(|o| o.malicious));
    }

    #[test]
    fn single_flagged_report_is_malicious() {
        let report = report_at(500.0, 500.0, -110.0, Label::Malicious);
        let outcomes = regional_count_rule(&[&report], &RegionalRule::default());
        assert_eq!(outcomes.len(), 1);
        assert!(outcomes[0].malicious);
        assert_eq!(outcomes[0].neighbor_count, 0);
    }

    #[test]
    fn adding_a_flagged_report_never_flips_real_to_malicious() {
        let mut reports: Vec<MdtReport> = (0..11)
            .map(|i| report_at(500.0 + i as f64 * 8.0, 500.0, -110.0, Label::RealOutage))
            .collect();
        let refs: Vec<&MdtReport> = reports.iter().collect();
        let before = regional_count_rule(&refs, &RegionalRule::default());
        reports.push(report_at(510.0, 505.0, -110.0, Label::Malicious));
        let refs: Vec<&MdtReport> = reports.iter().collect();
        let after = regional_count_rule(&refs, &RegionalRule::default());
        for (b, a) in before.iter().zip(after.iter()) {
            assert!(
                !(a.malicious && !b.malicious),
                "new reports can only add neighbors"
            );
            assert!(a.neighbor_count >= b.neighbor_count);
        }
    }
}
