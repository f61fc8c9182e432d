//! Shared fixtures for unit tests.

use crate::geometry::{Area, Point};
use crate::radio::{CellSite, NetworkLayout, PathlossParams};
use crate::scenario::{ReportingMode, ScenarioConfig};
use crate::shadowing::ShadowingParams;

/// Regular rows x cols site grid over 1 km^2.
pub(crate) fn grid_layout(rows: usize, cols: usize, sigma_db: f64) -> NetworkLayout {
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
        shadowing: ShadowingParams {
            sigma_db,
            decorrelation_distance_m: 50.0,
        },
    }
}

/// 3x3-grid scenario with moderate shadowing.
pub(crate) fn small_config(
    n_ues: usize,
    n_reports: usize,
    outage: Vec<u32>,
    seed: u64,
) -> ScenarioConfig {
    ScenarioConfig {
        layout: grid_layout(3, 3, 6.0),
        n_ues,
        n_reports,
        outage_cells: outage,
        reporting_mode: ReportingMode::Immediate,
        logged_period: 1,
        max_ticks: 10_000,
        rng_seed: seed,
    }
}
