//! UE deployment, MDT report generation and dataset serialization.
//!
//! A scenario deploys `n_ues` stationary UEs uniformly over the area, draws
//! one shadowing realization shared by every consumer (reports, KPI points,
//! drive testers), and emits measurement reports tick by tick until the
//! requested dataset size is reached. Ground-truth labels come from the
//! counterfactual all-active network: a report is `real_outage` when its
//! pre-outage best server is in the outage set. Measurements themselves are
//! always taken on the degraded network, so outage reports genuinely show the
//! next-best server's weak signal.
//!
//! All dB/position values are rounded to six decimals at generation time,
//! which makes the CSV round trip lossless and reruns byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::digest;
use crate::error::{Error, Result};
use crate::geometry::{Area, Point};
use crate::learn::FeatureMatrix;
use crate::radio::{compute_radio_sample, NetworkLayout};
use crate::rng;
use crate::shadowing::{SiteFields, DEFAULT_POSITION_CAP};

pub const NEIGHBOR_SLOTS: usize = 6;
/// Pad values for missing neighbor slots, below any physical measurement.
pub const RSRP_SENTINEL_DBM: f64 = -160.0;
pub const RSRQ_SENTINEL_DB: f64 = -30.0;

pub const FEATURE_COLS: usize = 16;
/// Fixed feature-column order of the detector view (labels excluded).
pub const FEATURE_NAMES: [&str; FEATURE_COLS] = [
    "x_m",
    "y_m",
    "serving_rsrp_dbm",
    "serving_rsrq_db",
    "n1_rsrp",
    "n2_rsrp",
    "n3_rsrp",
    "n4_rsrp",
    "n5_rsrp",
    "n6_rsrp",
    "n1_rsrq",
    "n2_rsrq",
    "n3_rsrq",
    "n4_rsrq",
    "n5_rsrq",
    "n6_rsrq",
];

pub const DATASET_HEADER: &str = "ue_id,tick,x_m,y_m,serving_cell,serving_rsrp_dbm,serving_rsrq_db,n1_rsrp,n2_rsrp,n3_rsrp,n4_rsrp,n5_rsrp,n6_rsrp,n1_rsrq,n2_rsrq,n3_rsrq,n4_rsrq,n5_rsrq,n6_rsrq,label";

/// Ground-truth report class; withheld from detectors at inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Normal,
    RealOutage,
    Malicious,
}

impl Label {
    pub fn code(&self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::RealOutage => 1,
            Label::Malicious => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Label> {
        match code {
            0 => Ok(Label::Normal),
            1 => Ok(Label::RealOutage),
            2 => Ok(Label::Malicious),
            other => Err(Error::InvalidInput(format!("unknown label code {other}"))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Normal => write!(f, "normal"),
            Label::RealOutage => write!(f, "real_outage"),
            Label::Malicious => write!(f, "malicious"),
        }
    }
}

/// One UE measurement record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdtReport {
    pub ue_id: u32,
    pub tick: u32,
    pub position: Point,
    pub serving_cell: u32,
    pub serving_rsrp_dbm: f64,
    pub serving_rsrq_db: f64,
    /// Six strongest neighbors' RSRP, non-increasing, sentinel-padded.
    pub neighbor_rsrp_dbm: [f64; NEIGHBOR_SLOTS],
    /// RSRQ of the same neighbors, slot-aligned with `neighbor_rsrp_dbm`.
    pub neighbor_rsrq_db: [f64; NEIGHBOR_SLOTS],
    pub label: Label,
}

impl MdtReport {
    /// The 16-column detector view of this report.
    pub fn features(&self) -> [f64; FEATURE_COLS] {
        let mut out = [0.0; FEATURE_COLS];
        out[0] = self.position.x_m;
        out[1] = self.position.y_m;
        out[2] = self.serving_rsrp_dbm;
        out[3] = self.serving_rsrq_db;
        out[4..10].copy_from_slice(&self.neighbor_rsrp_dbm);
        out[10..16].copy_from_slice(&self.neighbor_rsrq_db);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportingMode {
    /// The UE reports each measurement in the tick it was taken.
    Immediate,
    /// The UE buffers measurements and delivers them when a periodic timer
    /// expires; delivery carries the flush tick, measurements keep their
    /// original positions and values.
    Logged,
}

/// Full experiment description for report generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub layout: NetworkLayout,
    pub n_ues: usize,
    pub n_reports: usize,
    pub outage_cells: Vec<u32>,
    pub reporting_mode: ReportingMode,
    pub logged_period: u32,
    pub max_ticks: u32,
    pub rng_seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        if self.n_ues < 1 {
            return Err(Error::Config("n_ues must be >= 1".into()));
        }
        if self.n_reports < 1 {
            return Err(Error::Config("n_reports must be >= 1".into()));
        }
        if self.logged_period < 1 {
            return Err(Error::Config("logged_period must be >= 1".into()));
        }
        if self.n_reports > self.n_ues * self.max_ticks as usize {
            return Err(Error::Config(format!(
                "n_reports {} not achievable with {} UEs over {} ticks",
                self.n_reports, self.n_ues, self.max_ticks
            )));
        }
        for id in &self.outage_cells {
            if self.layout.site_index(*id).is_none() {
                return Err(Error::Config(format!("outage cell {id} not in layout")));
            }
        }
        Ok(())
    }

    /// Digest identifying the generating configuration.
    pub fn digest(&self) -> Result<String> {
        digest::of(self)
    }
}

/// A labeled report collection plus the digest of its generating config.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub reports: Vec<MdtReport>,
    pub config_digest: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    /// Detector view: n x 16 feature matrix, labels excluded by construction.
    pub fn feature_matrix(&self) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.reports.len() * FEATURE_COLS);
        for r in &self.reports {
            data.extend_from_slice(&r.features());
        }
        FeatureMatrix::new(self.reports.len(), FEATURE_COLS, data)
            .expect("report features are finite")
    }

    pub fn labels(&self) -> Vec<Label> {
        self.reports.iter().map(|r| r.label).collect()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.reports.iter().filter(|r| r.label == label).count()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 + self.reports.len() * 220);
        out.push_str(DATASET_HEADER);
        out.push('\n');
        for r in &self.reports {
            let _ = write!(
                out,
                "{},{},{:.6},{:.6},{}",
                r.ue_id, r.tick, r.position.x_m, r.position.y_m, r.serving_cell
            );
            let _ = write!(out, ",{:.6},{:.6}", r.serving_rsrp_dbm, r.serving_rsrq_db);
            for v in &r.neighbor_rsrp_dbm {
                let _ = write!(out, ",{v:.6}");
            }
            for v in &r.neighbor_rsrq_db {
                let _ = write!(out, ",{v:.6}");
            }
            let _ = writeln!(out, ",{}", r.label.code());
        }
        out
    }
}

/// Rounds to six decimals, the dataset's serialized precision.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Draws `n` i.i.d. uniform positions over the area, deterministic per seed.
/// Coordinates are rounded to the dataset precision.
pub fn deploy_ues(n: usize, area: &Area, seed: u64) -> Result<Vec<Point>> {
    if n < 1 {
        return Err(Error::InvalidInput("need n >= 1 UEs".into()));
    }
    let mut rng = rng::seeded(seed, rng::stream::DEPLOY);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rand::Rng::random::<f64>(&mut rng) * area.width_m;
        let y = rand::Rng::random::<f64>(&mut rng) * area.height_m;
        out.push(Point::new(round6(x), round6(y)));
    }
    Ok(out)
}

/// The sampled world shared by every module of one scenario run: UE positions
/// first, then any extra evaluation/grid positions, all under one shadowing
/// realization per site.
pub struct ScenarioEnv {
    pub fields: SiteFields,
    pub n_ues: usize,
}

impl ScenarioEnv {
    pub fn ue_positions(&self) -> &[Point] {
        &self.fields.positions()[..self.n_ues]
    }

    pub fn ue_indices(&self) -> Vec<usize> {
        (0..self.n_ues).collect()
    }
}

/// Builds the scenario environment: deployed UEs plus `extra_positions`
/// (e.g. coverage-grid pixels) under one joint field draw.
pub fn build_env(config: &ScenarioConfig, extra_positions: &[Point]) -> Result<ScenarioEnv> {
    config.validate()?;
    let mut positions = deploy_ues(config.n_ues, &config.layout.area, config.rng_seed)?;
    positions.extend_from_slice(extra_positions);
    let fields = SiteFields::sample(
        &positions,
        config.layout.sites.len(),
        &config.layout.shadowing,
        config.rng_seed,
        DEFAULT_POSITION_CAP,
    )?;
    Ok(ScenarioEnv {
        fields,
        n_ues: config.n_ues,
    })
}

/// Generates the labeled dataset for `config`, returning the environment so
/// downstream consumers (KPIs, drive testers) share the same field.
pub fn generate_reports(config: &ScenarioConfig) -> Result<(Dataset, ScenarioEnv)> {
    let env = build_env(config, &[])?;
    let dataset = generate_reports_in_env(config, &env)?;
    Ok((dataset, env))
}

/// Report generation against an existing environment (positions and shadowing
/// already drawn). The environment must have been built for this config's UE
/// count.
pub fn generate_reports_in_env(config: &ScenarioConfig, env: &ScenarioEnv) -> Result<Dataset> {
    config.validate()?;
    if env.n_ues != config.n_ues {
        return Err(Error::InvalidInput(format!(
            "environment holds {} UEs, config wants {}",
            env.n_ues, config.n_ues
        )));
    }
    let degraded = config.layout.with_outage(&config.outage_cells)?;

    // Radio conditions are static per UE; evaluate once and reuse per tick.
    let mut per_ue: Vec<(MdtReport, Label)> = Vec::with_capacity(config.n_ues);
    for (i, pos) in env.ue_positions().iter().enumerate() {
        let shadow = env.fields.shadow_vector(i);
        let measured = compute_radio_sample(pos, &degraded, &shadow)?;
        let counterfactual = compute_radio_sample(pos, &config.layout, &shadow)?;
        let label = if config.outage_cells.contains(&counterfactual.serving_id) {
            Label::RealOutage
        } else {
            Label::Normal
        };

        let mut neighbor_rsrp = [RSRP_SENTINEL_DBM; NEIGHBOR_SLOTS];
        let mut neighbor_rsrq = [RSRQ_SENTINEL_DB; NEIGHBOR_SLOTS];
        for (slot, &idx) in measured
            .neighbor_indices
            .iter()
            .take(NEIGHBOR_SLOTS)
            .enumerate()
        {
            neighbor_rsrp[slot] = round6(measured.rsrp_dbm[idx]);
            neighbor_rsrq[slot] = round6(measured.rsrq_db[idx]);
        }
        let report = MdtReport {
            ue_id: i as u32,
            tick: 0,
            position: *pos,
            serving_cell: measured.serving_id,
            serving_rsrp_dbm: round6(measured.rsrp_dbm[measured.serving_index]),
            serving_rsrq_db: round6(measured.rsrq_db[measured.serving_index]),
            neighbor_rsrp_dbm: neighbor_rsrp,
            neighbor_rsrq_db: neighbor_rsrq,
            label,
        };
        per_ue.push((report, label));
    }

    // Measurement events in tick-major, UE-minor order until the size is hit.
    let period = config.logged_period;
    let mut reports = Vec::with_capacity(config.n_reports);
    'outer: for tick in 0..config.max_ticks {
        for (report, _) in &per_ue {
            if reports.len() == config.n_reports {
                break 'outer;
            }
            let mut r = report.clone();
            r.tick = match config.reporting_mode {
                ReportingMode::Immediate => tick,
                // Buffered measurements are delivered at the end of their
                // logging period, stamped with the flush tick.
                ReportingMode::Logged => (tick / period + 1) * period - 1,
            };
            reports.push(r);
        }
    }
    if reports.len() != config.n_reports {
        return Err(Error::Config(format!(
            "generated {} reports, wanted {}",
            reports.len(),
            config.n_reports
        )));
    }

    Ok(Dataset {
        reports,
        config_digest: config.digest()?,
    })
}

/// Writes the dataset CSV plus a `<path>.digest` sidecar carrying the
/// generating-config digest.
pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, dataset.to_csv_string())?;
    std::fs::write(sidecar_path(path), format!("{}\n", dataset.config_digest))?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".digest");
    std::path::PathBuf::from(os)
}

/// Reads a dataset CSV; the digest sidecar is picked up when present.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let content = std::fs::read_to_string(path)?;
    let mut dataset = parse_dataset(&content)?;
    if let Ok(digest) = std::fs::read_to_string(sidecar_path(path)) {
        dataset.config_digest = digest.trim().to_string();
    }
    Ok(dataset)
}

/// Strict read: the stored digest must match `expected_digest`.
pub fn read_dataset_strict(path: &Path, expected_digest: &str) -> Result<Dataset> {
    let dataset = read_dataset(path)?;
    if dataset.config_digest != expected_digest {
        return Err(Error::Integrity(format!(
            "dataset digest {} does not match expected {}",
            if dataset.config_digest.is_empty() {
                "<missing>"
            } else {
                &dataset.config_digest
            },
            expected_digest
        )));
    }
    Ok(dataset)
}

fn parse_dataset(content: &str) -> Result<Dataset> {
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == DATASET_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Parse {
                line: 1,
                last_good: 0,
                msg: format!("unexpected header: {header}"),
            });
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                last_good: 0,
                msg: "empty file".into(),
            });
        }
    }

    let mut reports = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        reports.push(parse_report_line(line).map_err(|msg| Error::Parse {
            line: line_no,
            last_good: line_no - 1,
            msg,
        })?);
    }
    Ok(Dataset {
        reports,
        config_digest: String::new(),
    })
}

fn parse_report_line(line: &str) -> std::result::Result<MdtReport, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 20 {
        return Err(format!("expected 20 fields, found {}", fields.len()));
    }
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
        s.parse::<T>().map_err(|_| format!("bad {what}: {s}"))
    }
    let mut neighbor_rsrp = [0.0; NEIGHBOR_SLOTS];
    let mut neighbor_rsrq = [0.0; NEIGHBOR_SLOTS];
    for k in 0..NEIGHBOR_SLOTS {
        neighbor_rsrp[k] = num(fields[7 + k], "neighbor rsrp")?;
        neighbor_rsrq[k] = num(fields[13 + k], "neighbor rsrq")?;
    }
    Ok(MdtReport {
        ue_id: num(fields[0], "ue_id")?,
        tick: num(fields[1], "tick")?,
        position: Point::new(num(fields[2], "x_m")?, num(fields[3], "y_m")?),
        serving_cell: num(fields[4], "serving_cell")?,
        serving_rsrp_dbm: num(fields[5], "serving_rsrp_dbm")?,
        serving_rsrq_db: num(fields[6], "serving_rsrq_db")?,
        neighbor_rsrp_dbm: neighbor_rsrp,
        neighbor_rsrq_db: neighbor_rsrq,
        label: Label::from_code(num::<u8>(fields[19], "label")?).map_err(|e| e.to_string())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_config;

    #[test]
    fn deploy_is_uniform_and_deterministic() {
        let area = Area::new(1000.0, 1000.0);
        let a = deploy_ues(10_000, &area, 42).unwrap();
        let b = deploy_ues(10_000, &area, 42).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(area.contains(p));
        }
        // Empirical mean within 3 sigma of the area center (CLT:
        // sigma_mean = (1000 / sqrt(12)) / sqrt(n) ~ 2.89 m).
        let mean_x: f64 = a.iter().map(|p| p.x_m).sum::<f64>() / a.len() as f64;
        let mean_y: f64 = a.iter().map(|p| p.y_m).sum::<f64>() / a.len() as f64;
        let bound = 3.0 * (1000.0 / 12f64.sqrt()) / (a.len() as f64).sqrt();
        assert!((mean_x - 500.0).abs() < bound, "mean x {mean_x}");
        assert!((mean_y - 500.0).abs() < bound, "mean y {mean_y}");
    }

    #[test]
    fn single_ue_deploys_inside_area() {
        let area = Area::new(100.0, 50.0);
        let p = deploy_ues(1, &area, 7).unwrap();
        assert_eq!(p.len(), 1);
        assert!(area.contains(&p[0]));
    }

    #[test]
    fn no_outage_means_all_normal() {
        let cfg = small_config(50, 100, vec![], 1);
        let (ds, _) = generate_reports(&cfg).unwrap();
        assert_eq!(ds.len(), 100);
        assert!(ds.reports.iter().all(|r| r.label == Label::Normal));
    }

    #[test]
    fn dataset_size_is_exact() {
        for n in [1, 49, 50, 51, 137] {
            let cfg = small_config(50, n, vec![], 2);
            let (ds, _) = generate_reports(&cfg).unwrap();
            assert_eq!(ds.len(), n);
        }
    }

    #[test]
    fn unreachable_report_count_is_config_error() {
        let mut cfg = small_config(10, 100, vec![], 3);
        cfg.max_ticks = 5;
        assert!(matches!(generate_reports(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn logged_period_one_matches_immediate() {
        let mut cfg = small_config(40, 100, vec![0], 4);
        let (immediate, _) = generate_reports(&cfg).unwrap();
        cfg.reporting_mode = ReportingMode::Logged;
        cfg.logged_period = 1;
        let (logged, _) = generate_reports(&cfg).unwrap();
        assert_eq!(immediate.reports, logged.reports);
    }

    #[test]
    fn logged_mode_preserves_measurement_multiset() {
        let mut cfg = small_config(30, 95, vec![0], 5);
        let (immediate, _) = generate_reports(&cfg).unwrap();
        cfg.reporting_mode = ReportingMode::Logged;
        cfg.logged_period = 4;
        let (logged, _) = generate_reports(&cfg).unwrap();

        let strip = |ds: &Dataset| {
            let mut v: Vec<(u32, String)> = ds
                .reports
                .iter()
                .map(|r| {
                    (
                        r.ue_id,
                        format!("{:?}{:?}", r.position, r.serving_rsrp_dbm),
                    )
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(strip(&immediate), strip(&logged));
        // Flush ticks land at period boundaries.
        assert!(logged
            .reports
            .iter()
            .all(|r| (r.tick + 1) % cfg.logged_period == 0));
    }

    #[test]
    fn neighbor_rsrp_is_non_increasing() {
        let cfg = small_config(200, 200, vec![0, 4], 6);
        let (ds, _) = generate_reports(&cfg).unwrap();
        for r in &ds.reports {
            for w in r.neighbor_rsrp_dbm.windows(2) {
                assert!(w[0] >= w[1], "neighbor order violated: {:?}", r.neighbor_rsrp_dbm);
            }
        }
    }

    #[test]
    fn three_cell_outage_pads_sixth_neighbor_slot() {
        // 9 sites, 3 in outage: 6 active => serving + 5 neighbors, last slot padded.
        let cfg = small_config(50, 50, vec![0, 4, 8], 7);
        let (ds, _) = generate_reports(&cfg).unwrap();
        for r in &ds.reports {
            assert_eq!(r.neighbor_rsrp_dbm[5], RSRP_SENTINEL_DBM);
            assert_eq!(r.neighbor_rsrq_db[5], RSRQ_SENTINEL_DB);
            assert!(r.neighbor_rsrp_dbm[4] > RSRP_SENTINEL_DBM);
        }
    }

    #[test]
    fn outage_never_improves_serving_rsrp() {
        let cfg = small_config(300, 300, vec![0, 1], 8);
        let env = build_env(&cfg, &[]).unwrap();
        let ds = generate_reports_in_env(&cfg, &env).unwrap();
        let healthy = cfg.layout.clone();
        for (i, r) in ds.reports.iter().take(cfg.n_ues).enumerate() {
            if r.label == Label::RealOutage {
                let shadow = env.fields.shadow_vector(i);
                let full = compute_radio_sample(&r.position, &healthy, &shadow).unwrap();
                let full_serving = full.rsrp_dbm[full.serving_index];
                assert!(
                    r.serving_rsrp_dbm <= round6(full_serving) + 1e-9,
                    "outage must not improve serving RSRP"
                );
            }
        }
    }

    #[test]
    fn outage_fraction_tracks_best_server_partition() {
        // Fraction of real_outage labels vs fraction of UE positions whose
        // all-active best server is an outage cell; identical by construction,
        // so check via an independent recomputation.
        let cfg = small_config(800, 800, vec![0, 4, 8], 9);
        let (ds, env) = generate_reports(&cfg).unwrap();
        let mut expected = 0usize;
        for (i, pos) in env.ue_positions().iter().enumerate() {
            let shadow = env.fields.shadow_vector(i);
            let full = compute_radio_sample(pos, &cfg.layout, &shadow).unwrap();
            if cfg.outage_cells.contains(&full.serving_id) {
                expected += 1;
            }
        }
        let labeled = ds
            .reports
            .iter()
            .take(cfg.n_ues)
            .filter(|r| r.label == Label::RealOutage)
            .count();
        assert_eq!(labeled, expected);
        // And the share is in the ballpark of the 3-of-9 area partition.
        let frac = labeled as f64 / cfg.n_ues as f64;
        assert!((0.15..0.55).contains(&frac), "outage fraction {frac}");
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let cfg = small_config(60, 120, vec![2], 10);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(ds, back);
        // Strict read with the right digest passes, wrong digest fails.
        assert!(read_dataset_strict(&path, &ds.config_digest).is_ok());
        assert!(matches!(
            read_dataset_strict(&path, "deadbeef"),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn empty_dataset_round_trips_as_header_only() {
        let ds = Dataset {
            reports: vec![],
            config_digest: "x".into(),
        };
        let csv = ds.to_csv_string();
        assert_eq!(csv, format!("{DATASET_HEADER}\n"));
        let back = parse_dataset(&csv).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn truncated_row_names_failing_line() {
        let cfg = small_config(20, 20, vec![], 11);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let csv = ds.to_csv_string();
        let truncated = &csv[..csv.len() - 40];
        let err = parse_dataset(truncated).unwrap_err();
        match err {
            Error::Parse { line, last_good, .. } => {
                assert_eq!(line, 21, "failing line is the 20th data row");
                assert_eq!(last_good, 20);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn feature_matrix_has_sixteen_columns() {
        let cfg = small_config(30, 30, vec![1], 12);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let m = ds.feature_matrix();
        assert_eq!((m.rows(), m.cols()), (30, FEATURE_COLS));
        assert_eq!(m.get(0, 0), ds.reports[0].position.x_m);
        assert_eq!(m.get(0, 2), ds.reports[0].serving_rsrp_dbm);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small_config(100, 250, vec![3], 13);
        let (a, _) = generate_reports(&cfg).unwrap();
        let (b, _) = generate_reports(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}
