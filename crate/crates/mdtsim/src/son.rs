//! A deliberately trusting SON engine: outage triggering from raw reports and
//! cell outage compensation, plus KPI evaluation.
//!
//! The engine believes every report it is fed. Guarding happens upstream by
//! filtering the report stream (see [`crate::pipeline`]); trigger and
//! compensation are one code path for both the naive and the guarded variants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::learn::quantile_interpolated;
use crate::radio::{compute_pathloss, compute_radio_sample, NetworkLayout};
use crate::scenario::MdtReport;
use crate::shadowing::SiteFields;

/// One compensation action: boost the geometric neighbors of a failed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocAction {
    pub outage_cell: u32,
    pub compensating_cells: Vec<u32>,
    pub power_boost_db: f64,
}

impl CocAction {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=10.0).contains(&self.power_boost_db) {
            return Err(Error::InvalidAction(format!(
                "power boost must lie in [0, 10] dB, got {}",
                self.power_boost_db
            )));
        }
        if self.compensating_cells.contains(&self.outage_cell) {
            return Err(Error::InvalidAction(format!(
                "cell {} cannot compensate itself",
                self.outage_cell
            )));
        }
        Ok(())
    }
}

/// Trigger thresholds for the trusting outage detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    pub rsrp_floor_dbm: f64,
    pub min_reports: usize,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            rsrp_floor_dbm: -120.0,
            min_reports: 5,
        }
    }
}

/// Deterministic position-to-cell partition the engine reasons with: the best
/// server by deterministic link budget (no shadowing), all sites considered
/// radiating. Robust against forged serving-cell ids in reports.
pub fn geographic_best_server(layout: &NetworkLayout, pos: &Point) -> u32 {
    let mut best = (f64::NEG_INFINITY, u32::MAX);
    for site in &layout.sites {
        let pl = compute_pathloss(pos.distance(&site.position), &layout.pathloss)
            .expect("finite distance");
        let rsrp = layout.per_re_tx_dbm(site) - pl;
        if rsrp > best.0 || (rsrp == best.0 && site.id < best.1) {
            best = (rsrp, site.id);
        }
    }
    best.1
}

/// Cells for which at least `min_reports` reports from their geographic region
/// claim serving RSRP below the floor. The trusting engine consults no filter.
pub fn trigger_outage_detection(
    reports: &[MdtReport],
    layout: &NetworkLayout,
    config: &TriggerConfig,
) -> Vec<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for report in reports {
        if report.serving_rsrp_dbm < config.rsrp_floor_dbm {
            let cell = geographic_best_server(layout, &report.position);
            *counts.entry(cell).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n >= config.min_reports)
        .map(|(cell, _)| cell)
        .collect()
}

/// The `k` nearest active sites to `cell`, by site-to-site distance.
pub fn nearest_neighbor_cells(layout: &NetworkLayout, cell: u32, k: usize) -> Result<Vec<u32>> {
    let idx = layout
        .site_index(cell)
        .ok_or_else(|| Error::InvalidInput(format!("unknown cell id {cell}")))?;
    let origin = layout.sites[idx].position;
    let mut candidates: Vec<(f64, u32)> = layout
        .sites
        .iter()
        .filter(|s| s.id != cell && s.active)
        .map(|s| (origin.distance(&s.position), s.id))
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(candidates.into_iter().take(k).map(|(_, id)| id).collect())
}

/// Applies one compensation action to a copy of the layout.
pub fn apply_coc(layout: &NetworkLayout, action: &CocAction) -> Result<NetworkLayout> {
    action.validate()?;
    let mut out = layout.clone();
    for cell in &action.compensating_cells {
        let idx = out
            .site_index(*cell)
            .ok_or_else(|| Error::InvalidAction(format!("unknown compensating cell {cell}")))?;
        if !out.sites[idx].active {
            return Err(Error::InvalidAction(format!(
                "cannot compensate through inactive cell {cell}"
            )));
        }
        out.sites[idx].tx_power_dbm += action.power_boost_db;
    }
    Ok(out)
}

/// Stateful engine wrapper: records applied actions and refuses duplicates.
#[derive(Debug, Clone)]
pub struct SonEngine {
    layout: NetworkLayout,
    actions: Vec<CocAction>,
}

impl SonEngine {
    pub fn new(layout: NetworkLayout) -> Self {
        SonEngine {
            layout,
            actions: Vec::new(),
        }
    }

    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    pub fn actions(&self) -> &[CocAction] {
        &self.actions
    }

    pub fn apply(&mut self, action: CocAction) -> Result<()> {
        if self.actions.iter().any(|a| a.outage_cell == action.outage_cell) {
            return Err(Error::InvalidAction(format!(
                "compensation for cell {} already applied",
                action.outage_cell
            )));
        }
        self.layout = apply_coc(&self.layout, &action)?;
        self.actions.push(action);
        Ok(())
    }
}

/// Network quality summary over a set of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiSummary {
    pub mean_sinr_db: f64,
    pub p05_sinr_db: f64,
    /// Fraction of points with SINR at or above the coverage threshold.
    pub coverage_ratio: f64,
    pub n_points: usize,
    /// Evaluation points per serving cell.
    pub per_cell_counts: BTreeMap<u32, usize>,
}

pub const COVERAGE_SINR_THRESHOLD_DB: f64 = -6.0;

pub const KPI_LOG_HEADER: &str = "scenario,variant,mean_sinr_db,p05_sinr_db,coverage_ratio";

/// One experiment-log CSV row for a KPI summary.
pub fn kpi_log_row(scenario: &str, variant: &str, kpi: &KpiSummary) -> String {
    format!(
        "{},{},{:.6},{:.6},{:.6}",
        scenario, variant, kpi.mean_sinr_db, kpi.p05_sinr_db, kpi.coverage_ratio
    )
}

/// KPIs over the field positions selected by `point_indices`, measured on
/// `layout` with the scenario's shadowing realization.
pub fn evaluate_kpis(
    layout: &NetworkLayout,
    fields: &SiteFields,
    point_indices: &[usize],
    sinr_threshold_db: f64,
) -> Result<KpiSummary> {
    if point_indices.is_empty() {
        return Err(Error::Evaluation("no evaluation points".into()));
    }
    let mut sinrs = Vec::with_capacity(point_indices.len());
    let mut per_cell: BTreeMap<u32, usize> = BTreeMap::new();
    for &i in point_indices {
        let pos = fields.positions()[i];
        let shadow = fields.shadow_vector(i);
        let sample = compute_radio_sample(&pos, layout, &shadow)
            .map_err(|e| Error::Evaluation(format!("point {i}: {e}")))?;
        sinrs.push(sample.sinr_db);
        *per_cell.entry(sample.serving_id).or_insert(0) += 1;
    }
    let mean = sinrs.iter().sum::<f64>() / sinrs.len() as f64;
    let p05 = quantile_interpolated(&sinrs, 0.05)?;
    let covered = sinrs.iter().filter(|s| **s >= sinr_threshold_db).count();
    Ok(KpiSummary {
        mean_sinr_db: mean,
        p05_sinr_db: p05,
        coverage_ratio: covered as f64 / sinrs.len() as f64,
        n_points: sinrs.len(),
        per_cell_counts: per_cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{inject_malicious, AttackSpec, ForgeStrategy, TargetRegion};
    use crate::scenario::{build_env, generate_reports, generate_reports_in_env, Label};
    use crate::testutil::{grid_layout, small_config};

    #[test]
    fn no_low_reports_means_no_suspects() {
        let cfg = small_config(100, 100, vec![], 1);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let suspects = trigger_outage_detection(&ds.reports, &cfg.layout, &TriggerConfig::default());
        assert!(suspects.is_empty());
    }

    #[test]
    fn genuine_outage_cells_are_suspected() {
        let outage = vec![0u32, 4, 8];
        let cfg = small_config(1000, 2000, outage.clone(), 2);
        let (ds, _) = generate_reports(&cfg).unwrap();
        // Deep-outage UEs report the next-best server at long range; a floor
        // near the healthy/dead boundary separates them.
        let trigger = TriggerConfig {
            rsrp_floor_dbm: -105.0,
            min_reports: 5,
        };
        let suspects = trigger_outage_detection(&ds.reports, &cfg.layout, &trigger);
        assert_eq!(suspects, outage, "exactly the outage cells get suspected");
    }

    #[test]
    fn concentrated_fakes_frame_a_healthy_cell() {
        let cfg = small_config(1000, 5000, vec![], 3);
        let env = build_env(&cfg, &[]).unwrap();
        let ds = generate_reports_in_env(&cfg, &env).unwrap();
        let mut spec = AttackSpec::new(ForgeStrategy::ForgeLowRsrp, 0.01, 4);
        let framed_center = Point::new(833.3, 833.3); // cell 8's region
        spec.target_region = Some(TargetRegion {
            center: framed_center,
            radius_m: 150.0,
        });
        let attacked = inject_malicious(&ds, &spec, None).unwrap();
        assert_eq!(attacked.count_label(Label::Malicious), 50);
        let suspects =
            trigger_outage_detection(&attacked.reports, &cfg.layout, &TriggerConfig::default());
        assert_eq!(suspects, vec![8], "the framed healthy cell gets suspected");
    }

    #[test]
    fn lowering_the_floor_never_enlarges_the_suspect_set() {
        let cfg = small_config(600, 1200, vec![0], 5);
        let (ds, _) = generate_reports(&cfg).unwrap();
        let mut last_len = usize::MAX;
        for floor in [-100.0, -105.0, -110.0, -115.0, -120.0, -130.0] {
            let trigger = TriggerConfig {
                rsrp_floor_dbm: floor,
                min_reports: 3,
            };
            let suspects = trigger_outage_detection(&ds.reports, &cfg.layout, &trigger);
            assert!(
                suspects.len() <= last_len,
                "suspect set grew when floor dropped to {floor}"
            );
            last_len = suspects.len();
        }
    }

    #[test]
    fn zero_boost_and_empty_compensation_are_identity() {
        let layout = grid_layout(3, 3, 0.0);
        let zero = CocAction {
            outage_cell: 0,
            compensating_cells: vec![1, 3],
            power_boost_db: 0.0,
        };
        assert_eq!(apply_coc(&layout, &zero).unwrap(), layout);
        let none = CocAction {
            outage_cell: 0,
            compensating_cells: vec![],
            power_boost_db: 3.0,
        };
        assert_eq!(apply_coc(&layout, &none).unwrap(), layout);
    }

    #[test]
    fn boost_raises_exactly_the_chosen_cells() {
        let layout = grid_layout(3, 3, 0.0);
        let action = CocAction {
            outage_cell: 4,
            compensating_cells: vec![1, 7],
            power_boost_db: 3.0,
        };
        let out = apply_coc(&layout, &action).unwrap();
        for (a, b) in layout.sites.iter().zip(out.sites.iter()) {
            let expected = if [1u32, 7].contains(&a.id) { 3.0 } else { 0.0 };
            assert_eq!(b.tx_power_dbm - a.tx_power_dbm, expected);
        }
    }

    #[test]
    fn compensating_an_inactive_cell_is_rejected() {
        let layout = grid_layout(3, 3, 0.0).with_outage(&[1]).unwrap();
        let action = CocAction {
            outage_cell: 0,
            compensating_cells: vec![1],
            power_boost_db: 3.0,
        };
        assert!(matches!(
            apply_coc(&layout, &action),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn action_validation_rejects_bad_boost_and_self_compensation() {
        let a = CocAction {
            outage_cell: 0,
            compensating_cells: vec![1],
            power_boost_db: 11.0,
        };
        assert!(a.validate().is_err());
        let b = CocAction {
            outage_cell: 0,
            compensating_cells: vec![0, 1],
            power_boost_db: 3.0,
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn engine_refuses_duplicate_compensation() {
        let mut engine = SonEngine::new(grid_layout(3, 3, 0.0).with_outage(&[0]).unwrap());
        let action = CocAction {
            outage_cell: 0,
            compensating_cells: vec![1, 3],
            power_boost_db: 3.0,
        };
        engine.apply(action.clone()).unwrap();
        assert_eq!(engine.actions().len(), 1);
        assert!(matches!(
            engine.apply(action),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn nearest_neighbors_skip_inactive_sites() {
        let layout = grid_layout(3, 3, 0.0).with_outage(&[1]).unwrap();
        let neighbors = nearest_neighbor_cells(&layout, 0, 3).unwrap();
        assert!(!neighbors.contains(&1));
        assert_eq!(neighbors.len(), 3);
        assert_eq!(neighbors[0], 3, "closest active neighbor of corner cell 0");
    }

    #[test]
    fn kpis_over_single_point_equal_that_point() {
        let cfg = small_config(1, 1, vec![], 6);
        let env = build_env(&cfg, &[]).unwrap();
        let kpis = evaluate_kpis(&cfg.layout, &env.fields, &[0], COVERAGE_SINR_THRESHOLD_DB).unwrap();
        let sample = compute_radio_sample(
            &env.fields.positions()[0],
            &cfg.layout,
            &env.fields.shadow_vector(0),
        )
        .unwrap();
        assert_eq!(kpis.mean_sinr_db, sample.sinr_db);
        assert_eq!(kpis.p05_sinr_db, sample.sinr_db);
        assert_eq!(kpis.n_points, 1);
    }

    #[test]
    fn compensating_a_healthy_network_lowers_mean_sinr() {
        // Boost with no actual outage: extra interference dominates.
        let cfg = small_config(800, 800, vec![], 7);
        let env = build_env(&cfg, &[]).unwrap();
        let indices = env.ue_indices();
        let before =
            evaluate_kpis(&cfg.layout, &env.fields, &indices, COVERAGE_SINR_THRESHOLD_DB).unwrap();
        let neighbors = nearest_neighbor_cells(&cfg.layout, 4, 3).unwrap();
        let boosted = apply_coc(
            &cfg.layout,
            &CocAction {
                outage_cell: 4,
                compensating_cells: neighbors,
                power_boost_db: 3.0,
            },
        )
        .unwrap();
        let after =
            evaluate_kpis(&boosted, &env.fields, &indices, COVERAGE_SINR_THRESHOLD_DB).unwrap();
        assert!(
            after.mean_sinr_db < before.mean_sinr_db,
            "needless compensation must cost SINR: {} vs {}",
            after.mean_sinr_db,
            before.mean_sinr_db
        );
    }

    #[test]
    fn compensation_restores_outage_region_tail_sinr() {
        let outage_cell = 0u32;
        let cfg = small_config(900, 900, vec![outage_cell], 8);
        let env = build_env(&cfg, &[]).unwrap();
        // Outage-region points: geographic best server is the dead cell.
        let region: Vec<usize> = env
            .ue_indices()
            .into_iter()
            .filter(|&i| {
                geographic_best_server(&cfg.layout, &env.fields.positions()[i]) == outage_cell
            })
            .collect();
        assert!(region.len() > 30, "enough points in the outage region");
        let degraded = cfg.layout.with_outage(&[outage_cell]).unwrap();
        let before =
            evaluate_kpis(&degraded, &env.fields, &region, COVERAGE_SINR_THRESHOLD_DB).unwrap();
        let neighbors = nearest_neighbor_cells(&degraded, outage_cell, 3).unwrap();
        let compensated = apply_coc(
            &degraded,
            &CocAction {
                outage_cell,
                compensating_cells: neighbors,
                power_boost_db: 3.0,
            },
        )
        .unwrap();
        let after =
            evaluate_kpis(&compensated, &env.fields, &region, COVERAGE_SINR_THRESHOLD_DB).unwrap();
        assert!(
            after.p05_sinr_db > before.p05_sinr_db,
            "compensation must lift the outage region tail: {} vs {}",
            after.p05_sinr_db,
            before.p05_sinr_db
        );
    }
}
