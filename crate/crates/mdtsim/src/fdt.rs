//! Flying drive testers: placement, dispatch and ground-truth re-measurement.
//!
//! Placement is the k-center problem over candidate sites (minimize the worst
//! travel distance to any point of the area), solved with the greedy
//! farthest-point heuristic. Verification re-measures the radio field at a
//! suspect location through the scenario's shadowing realization: a genuinely
//! dead zone confirms the outage, healthy coverage exposes the reports as
//! forged.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Area, Point};
use crate::radio::{compute_radio_sample, grid_positions, NetworkLayout};
use crate::scenario::MdtReport;
use crate::shadowing::SiteFields;

/// Evaluation-grid pitch for the placement objective, metres.
const OBJECTIVE_GRID_RESOLUTION_M: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdtFleet {
    pub homes: Vec<Point>,
    pub speed_mps: f64,
}

impl FdtFleet {
    pub fn k(&self) -> usize {
        self.homes.len()
    }
}

/// Max over area grid points of the distance to the nearest home.
pub fn kcenter_objective(homes: &[Point], area: &Area) -> Result<f64> {
    if homes.is_empty() {
        return Err(Error::InvalidInput("objective needs >= 1 home".into()));
    }
    let (grid, _, _) = grid_positions(area, OBJECTIVE_GRID_RESOLUTION_M)?;
    Ok(grid
        .iter()
        .map(|g| {
            homes
                .iter()
                .map(|h| g.distance(h))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// Greedy farthest-point placement of `k` testers among `candidates`.
///
/// Seeds with the candidate minimizing the max distance to the area corners
/// (the most central one), then repeatedly adds the candidate farthest from
/// the chosen set. Ties resolve to the lower candidate index.
pub fn place_fdts(candidates: &[Point], k: usize, area: &Area, speed_mps: f64) -> Result<FdtFleet> {
    if k == 0 || k > candidates.len() {
        return Err(Error::InvalidInput(format!(
            "fleet size must satisfy 1 <= k <= {} candidates, got {k}",
            candidates.len()
        )));
    }
    if !(speed_mps > 0.0) {
        return Err(Error::InvalidInput("speed must be > 0".into()));
    }

    let corners = area.corners();
    let mut chosen_idx: Vec<usize> = Vec::with_capacity(k);
    let seed = (0..candidates.len())
        .min_by(|&a, &b| {
            let worst = |i: usize| {
                corners
                    .iter()
                    .map(|c| candidates[i].distance(c))
                    .fold(0.0, f64::max)
            };
            worst(a).partial_cmp(&worst(b)).unwrap().then(a.cmp(&b))
        })
        .unwrap();
    chosen_idx.push(seed);

    while chosen_idx.len() < k {
        let next = (0..candidates.len())
            .filter(|i| !chosen_idx.contains(i))
            .max_by(|&a, &b| {
                let nearest = |i: usize| {
                    chosen_idx
                        .iter()
                        .map(|&c| candidates[i].distance(&candidates[c]))
                        .fold(f64::INFINITY, f64::min)
                };
                nearest(a).partial_cmp(&nearest(b)).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        chosen_idx.push(next);
    }

    Ok(FdtFleet {
        homes: chosen_idx.into_iter().map(|i| candidates[i]).collect(),
        speed_mps,
    })
}

/// Nearest tester to the target and its travel time. Equidistant homes
/// resolve to the lower index.
pub fn dispatch(fleet: &FdtFleet, target: &Point) -> Result<(usize, f64)> {
    if fleet.homes.is_empty() {
        return Err(Error::InvalidInput("empty fleet".into()));
    }
    let idx = (0..fleet.homes.len())
        .min_by(|&a, &b| {
            fleet.homes[a]
                .distance(target)
                .partial_cmp(&fleet.homes[b].distance(target))
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap();
    Ok((idx, fleet.homes[idx].distance(target) / fleet.speed_mps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdtVerdict {
    OutageConfirmed,
    AttackConfirmed,
}

impl std::fmt::Display for FdtVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FdtVerdict::OutageConfirmed => write!(f, "outage_confirmed"),
            FdtVerdict::AttackConfirmed => write!(f, "attack_confirmed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub location: Point,
    /// Mean serving RSRP the suspects claimed, dBm.
    pub reported_rsrp_dbm: f64,
    /// Serving RSRP the onboard UE actually measures, dBm (-inf if nothing
    /// radiates there).
    pub measured_rsrp_dbm: f64,
    pub verdict: FdtVerdict,
    pub travel_time_s: f64,
}

/// Re-measures the field at `location` on the true network with the scenario's
/// shadowing realization; outage is confirmed iff the measured serving RSRP is
/// below `floor_dbm`.
pub fn verify_at(
    location: &Point,
    suspect_reports: &[&MdtReport],
    layout: &NetworkLayout,
    fields: &SiteFields,
    floor_dbm: f64,
) -> VerificationResult {
    let reported = if suspect_reports.is_empty() {
        f64::NAN
    } else {
        suspect_reports
            .iter()
            .map(|r| r.serving_rsrp_dbm)
            .sum::<f64>()
            / suspect_reports.len() as f64
    };
    let shadow = fields.shadow_vector_at(location);
    let measured = match compute_radio_sample(location, layout, &shadow) {
        Ok(sample) => sample.rsrp_dbm[sample.serving_index],
        Err(Error::NoCoverage) => f64::NEG_INFINITY,
        Err(_) => f64::NEG_INFINITY,
    };
    let verdict = if measured < floor_dbm {
        FdtVerdict::OutageConfirmed
    } else {
        FdtVerdict::AttackConfirmed
    };
    VerificationResult {
        location: *location,
        reported_rsrp_dbm: reported,
        measured_rsrp_dbm: measured,
        verdict,
        travel_time_s: 0.0,
    }
}

/// Dispatches the nearest tester and verifies; the result carries the travel
/// time of the chosen tester.
pub fn dispatch_and_verify(
    fleet: &FdtFleet,
    location: &Point,
    suspect_reports: &[&MdtReport],
    layout: &NetworkLayout,
    fields: &SiteFields,
    floor_dbm: f64,
) -> Result<(usize, VerificationResult)> {
    let (idx, travel_time_s) = dispatch(fleet, location)?;
    let mut result = verify_at(location, suspect_reports, layout, fields, floor_dbm);
    result.travel_time_s = travel_time_s;
    Ok((idx, result))
}

/// `x_m,y_m,fdt_index,travel_time_s,measured_rsrp_dbm,verdict` CSV.
pub fn verification_log_csv(entries: &[(usize, VerificationResult)]) -> String {
    let mut out = String::from("x_m,y_m,fdt_index,travel_time_s,measured_rsrp_dbm,verdict\n");
    for (idx, r) in entries {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{},{:.6},{:.6},{}",
            r.location.x_m, r.location.y_m, idx, r.travel_time_s, r.measured_rsrp_dbm, r.verdict
        );
    }
    out
}
