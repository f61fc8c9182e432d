//! Deterministic radio propagation: pathloss, received powers, link quality
//! and coverage grids.
//!
//! RSRP is per resource element: the total site power is spread over
//! `12 * bandwidth_rb` subcarriers before pathloss and shadowing apply. SINR
//! and RSRQ are computed in the linear domain and converted back to dB.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Area, Point};
use crate::shadowing::{ShadowingParams, SiteFields, DEFAULT_POSITION_CAP};

/// Log-distance pathloss parameters: `PL(d) = A + B log10(d / 1 km)` with a
/// near-field clamp at `min_distance_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossParams {
    pub intercept_db: f64,
    pub slope_db_per_decade: f64,
    pub min_distance_m: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        // Standard macro LTE form at 2 GHz.
        PathlossParams {
            intercept_db: 128.1,
            slope_db_per_decade: 37.6,
            min_distance_m: 10.0,
        }
    }
}

/// One base-station site. An inactive site radiates nothing and is treated as
/// -inf dBm received power everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub id: u32,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub bandwidth_rb: u32,
    pub active: bool,
}

/// The simulated network: sites plus the propagation environment they share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub sites: Vec<CellSite>,
    pub area: Area,
    pub noise_dbm_per_rb: f64,
    pub pathloss: PathlossParams,
    pub shadowing: ShadowingParams,
}

impl NetworkLayout {
    pub fn validate(&self) -> Result<()> {
        if self.sites.len() < 2 {
            return Err(Error::InvalidInput("layout needs at least 2 sites".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for site in &self.sites {
            if !seen.insert(site.id) {
                return Err(Error::InvalidInput(format!("duplicate site id {}", site.id)));
            }
            if !site.tx_power_dbm.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "site {} tx power must be finite",
                    site.id
                )));
            }
            if site.bandwidth_rb < 1 {
                return Err(Error::InvalidInput(format!(
                    "site {} needs bandwidth_rb >= 1",
                    site.id
                )));
            }
            if !self.area.contains(&site.position) {
                return Err(Error::InvalidInput(format!(
                    "site {} lies outside the area",
                    site.id
                )));
            }
        }
        if self.shadowing.sigma_db < 0.0 {
            return Err(Error::InvalidInput("shadowing sigma must be >= 0".into()));
        }
        if !(self.shadowing.decorrelation_distance_m > 0.0) {
            return Err(Error::InvalidInput(
                "decorrelation distance must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn site_index(&self, id: u32) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    pub fn active_count(&self) -> usize {
        self.sites.iter().filter(|s| s.active).count()
    }

    /// Copy of the layout with the listed sites deactivated.
    pub fn with_outage(&self, cells: &[u32]) -> Result<NetworkLayout> {
        let mut out = self.clone();
        for id in cells {
            let idx = out
                .site_index(*id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown cell id {id}")))?;
            out.sites[idx].active = false;
        }
        Ok(out)
    }

    /// Per-resource-element transmit power of a site, dBm.
    pub fn per_re_tx_dbm(&self, site: &CellSite) -> f64 {
        site.tx_power_dbm - 10.0 * (12.0 * site.bandwidth_rb as f64).log10()
    }
}

/// Log-distance pathloss in dB; monotone nondecreasing in distance.
pub fn compute_pathloss(distance_m: f64, params: &PathlossParams) -> Result<f64> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(Error::InvalidInput(format!(
            "distance must be finite and >= 0, got {distance_m}"
        )));
    }
    let d = distance_m.max(params.min_distance_m);
    Ok(params.intercept_db + params.slope_db_per_decade * (d / 1000.0).log10())
}

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Radio conditions at one position: per-site RSRP/RSRQ, the serving cell and
/// its wideband SINR, and neighbors ordered by RSRP descending.
#[derive(Debug, Clone)]
pub struct RadioSample {
    /// Per-site RSRP, dBm; -inf for inactive sites. Indexed like `layout.sites`.
    pub rsrp_dbm: Vec<f64>,
    /// Per-site RSRQ, dB; -inf for inactive sites.
    pub rsrq_db: Vec<f64>,
    pub sinr_db: f64,
    pub serving_index: usize,
    pub serving_id: u32,
    /// Active non-serving site indices by RSRP descending (ties by index).
    pub neighbor_indices: Vec<usize>,
}

/// Evaluates the radio formula chain at one position.
///
/// `shadow_db` carries one shadow value per site (indexed like `layout.sites`);
/// inactive sites' entries are ignored.
pub fn compute_radio_sample(
    ue_pos: &Point,
    layout: &NetworkLayout,
    shadow_db: &[f64],
) -> Result<RadioSample> {
    if shadow_db.len() != layout.sites.len() {
        return Err(Error::InvalidInput(format!(
            "shadow vector length {} != site count {}",
            shadow_db.len(),
            layout.sites.len()
        )));
    }
    let n = layout.sites.len();
    let mut rsrp_dbm = vec![f64::NEG_INFINITY; n];
    let mut rsrp_lin = vec![0.0f64; n];
    let mut total_lin = 0.0;
    let mut any_active = false;
    for (i, site) in layout.sites.iter().enumerate() {
        if !site.active {
            continue;
        }
        any_active = true;
        let pl = compute_pathloss(ue_pos.distance(&site.position), &layout.pathloss)?;
        let rsrp = layout.per_re_tx_dbm(site) - pl + shadow_db[i];
        rsrp_dbm[i] = rsrp;
        rsrp_lin[i] = db_to_lin(rsrp);
        total_lin += rsrp_lin[i];
    }
    if !any_active {
        return Err(Error::NoCoverage);
    }

    let serving_index = (0..n)
        .filter(|&i| layout.sites[i].active)
        .max_by(|&a, &b| {
            rsrp_dbm[a]
                .partial_cmp(&rsrp_dbm[b])
                .unwrap()
                .then(b.cmp(&a)) // ties resolve to the lower index
        })
        .unwrap();

    // RSSI over one RB = 12 subcarriers of every active site plus noise;
    // RSRQ = N * RSRP / RSSI reduces to rsrp / (12 * total + noise_per_rb).
    let noise_rb_lin = db_to_lin(layout.noise_dbm_per_rb);
    let rssi_per_rb = 12.0 * total_lin + noise_rb_lin;
    let mut rsrq_db = vec![f64::NEG_INFINITY; n];
    for i in 0..n {
        if layout.sites[i].active {
            rsrq_db[i] = lin_to_db(rsrp_lin[i] / rssi_per_rb);
        }
    }

    let noise_re_lin = db_to_lin(layout.noise_dbm_per_rb - 10.0 * 12f64.log10());
    let interference = total_lin - rsrp_lin[serving_index];
    let sinr_db = lin_to_db(rsrp_lin[serving_index] / (interference + noise_re_lin));

    let mut neighbor_indices: Vec<usize> = (0..n)
        .filter(|&i| layout.sites[i].active && i != serving_index)
        .collect();
    neighbor_indices.sort_by(|&a, &b| {
        rsrp_dbm[b]
            .partial_cmp(&rsrp_dbm[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    Ok(RadioSample {
        rsrp_dbm,
        rsrq_db,
        sinr_db,
        serving_index,
        serving_id: layout.sites[serving_index].id,
        neighbor_indices,
    })
}

/// Row-major SINR grid over the layout area.
#[derive(Debug, Clone)]
pub struct CoverageMap {
    pub n_cols: usize,
    pub n_rows: usize,
    pub positions: Vec<Point>,
    pub sinr_db: Vec<f64>,
}

impl CoverageMap {
    pub fn mean_sinr_db(&self) -> f64 {
        self.sinr_db.iter().sum::<f64>() / self.sinr_db.len() as f64
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x_m,y_m,sinr_db\n");
        for (p, s) in self.positions.iter().zip(self.sinr_db.iter()) {
            out.push_str(&format!("{:.6},{:.6},{:.6}\n", p.x_m, p.y_m, s));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Pixel-center positions of a grid tiling the area at roughly `resolution_m`.
/// The pixel pitch is adjusted so the grid tiles the area evenly; a resolution
/// at or above the area size yields a single pixel at the area center.
pub fn grid_positions(area: &Area, resolution_m: f64) -> Result<(Vec<Point>, usize, usize)> {
    if !(resolution_m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "grid resolution must be > 0, got {resolution_m}"
        )));
    }
    let n_cols = ((area.width_m / resolution_m).round() as usize).max(1);
    let n_rows = ((area.height_m / resolution_m).round() as usize).max(1);
    let dx = area.width_m / n_cols as f64;
    let dy = area.height_m / n_rows as f64;
    let mut positions = Vec::with_capacity(n_cols * n_rows);
    for r in 0..n_rows {
        for c in 0..n_cols {
            positions.push(Point::new(
                (c as f64 + 0.5) * dx,
                (r as f64 + 0.5) * dy,
            ));
        }
    }
    Ok((positions, n_cols, n_rows))
}

/// SINR at each of `positions` under `layout`, shadow values taken from
/// `fields` at the given position offset.
pub fn sinr_at_positions(
    layout: &NetworkLayout,
    fields: &SiteFields,
    position_offset: usize,
    positions: &[Point],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(positions.len());
    for (k, pos) in positions.iter().enumerate() {
        let shadow = fields.shadow_vector(position_offset + k);
        out.push(compute_radio_sample(pos, layout, &shadow)?.sinr_db);
    }
    Ok(out)
}

/// Coverage map with a fresh shadowing field draw, one consistent realization
/// for the whole grid.
pub fn coverage_map(layout: &NetworkLayout, resolution_m: f64, seed: u64) -> Result<CoverageMap> {
    let (positions, n_cols, n_rows) = grid_positions(&layout.area, resolution_m)?;
    let fields = SiteFields::sample(
        &positions,
        layout.sites.len(),
        &layout.shadowing,
        seed,
        DEFAULT_POSITION_CAP,
    )?;
    let sinr_db = sinr_at_positions(layout, &fields, 0, &positions)?;
    Ok(CoverageMap {
        n_cols,
        n_rows,
        positions,
        sinr_db,
    })
}
