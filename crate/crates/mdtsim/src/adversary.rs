//! Forged-outage report injection.
//!
//! Compromised UEs overwrite the measurement fields of their reports with
//! fabricated low-signal values while keeping their true positions; the lie is
//! therefore always exposable by re-measuring at the reported location.
//! Victims are drawn only from reports whose ground truth is `normal` — a fake
//! outage claim requires genuinely good coverage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::radio::NetworkLayout;
use crate::rng;
use crate::scenario::{Dataset, Label, MdtReport, NEIGHBOR_SLOTS};

/// How forged measurement values are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeStrategy {
    /// Crude forgery: serving RSRP uniform in a configurable low band,
    /// neighbors at most 3 dB above it.
    ForgeLowRsrp,
    /// Distribution-mimicking forgery: every measurement field is drawn from
    /// the empirical distribution of genuine real-outage reports, so value
    /// marginals alone cannot separate fake from real.
    MimicOutageDistribution,
}

/// Optional geographic concentration of the attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRegion {
    pub center: Point,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub strategy: ForgeStrategy,
    /// Fraction of the dataset size to forge, in [0, 0.95].
    pub malicious_fraction: f64,
    pub target_region: Option<TargetRegion>,
    pub seed: u64,
    /// Forged serving-RSRP band for `ForgeLowRsrp`, dBm.
    pub forge_rsrp_low_dbm: f64,
    pub forge_rsrp_high_dbm: f64,
}

impl AttackSpec {
    pub fn new(strategy: ForgeStrategy, malicious_fraction: f64, seed: u64) -> Self {
        AttackSpec {
            strategy,
            malicious_fraction,
            target_region: None,
            seed,
            forge_rsrp_low_dbm: -140.0,
            forge_rsrp_high_dbm: -120.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.95).contains(&self.malicious_fraction) {
            return Err(Error::InvalidInput(format!(
                "malicious fraction must be in [0, 0.95], got {}",
                self.malicious_fraction
            )));
        }
        if self.forge_rsrp_low_dbm >= self.forge_rsrp_high_dbm {
            return Err(Error::InvalidInput(
                "forge band low bound must be below high bound".into(),
            ));
        }
        Ok(())
    }
}

/// Deactivates the listed cells, leaving the original layout untouched.
pub fn apply_outage(layout: &NetworkLayout, cells: &[u32]) -> Result<NetworkLayout> {
    layout.with_outage(cells)
}

/// Per-field empirical value model of genuine real-outage reports, used by
/// the mimic strategy. Field order matches the 14 measurement features
/// (serving rsrp, serving rsrq, 6x neighbor rsrp, 6x neighbor rsrq).
#[derive(Debug, Clone)]
pub struct OutageValueModel {
    fields: Vec<Vec<f64>>,
}

pub const MIMIC_MIN_OUTAGE_REPORTS: usize = 10;

impl OutageValueModel {
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        let outage: Vec<&MdtReport> = dataset
            .reports
            .iter()
            .filter(|r| r.label == Label::RealOutage)
            .collect();
        if outage.len() < MIMIC_MIN_OUTAGE_REPORTS {
            return Err(Error::Injection(format!(
                "mimic strategy needs >= {MIMIC_MIN_OUTAGE_REPORTS} real-outage reports, found {}",
                outage.len()
            )));
        }
        let mut fields = vec![Vec::with_capacity(outage.len()); 14];
        for r in &outage {
            fields[0].push(r.serving_rsrp_dbm);
            fields[1].push(r.serving_rsrq_db);
            for k in 0..NEIGHBOR_SLOTS {
                fields[2 + k].push(r.neighbor_rsrp_dbm[k]);
                fields[8 + k].push(r.neighbor_rsrq_db[k]);
            }
        }
        Ok(OutageValueModel { fields })
    }

    fn draw(&self, field: usize, rng: &mut rng::ChaCha8Rng) -> f64 {
        let values = &self.fields[field];
        values[rand::Rng::random_range(rng, 0..values.len() as u64) as usize]
    }
}

/// Overwrites `ceil(fraction * n)` normal reports with forged outage values.
/// Positions, ids and ticks are untouched; labels become `malicious`.
pub fn inject_malicious(
    dataset: &Dataset,
    spec: &AttackSpec,
    value_model: Option<&OutageValueModel>,
) -> Result<Dataset> {
    spec.validate()?;
    let n_mal = (spec.malicious_fraction * dataset.len() as f64).ceil() as usize;
    let mut out = dataset.clone();
    if n_mal == 0 {
        return Ok(out);
    }
    if !dataset.reports.iter().any(|r| r.label == Label::Normal) {
        return Err(Error::Injection("dataset has no normal reports".into()));
    }

    let mut eligible: Vec<usize> = dataset
        .reports
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.label == Label::Normal
                && spec
                    .target_region
                    .map(|t| r.position.distance(&t.center) <= t.radius_m)
                    .unwrap_or(true)
        })
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < n_mal {
        return Err(Error::Injection(format!(
            "need {n_mal} forgeable normal reports, only {} eligible",
            eligible.len()
        )));
    }

    let model = match spec.strategy {
        ForgeStrategy::MimicOutageDistribution => Some(
            value_model.ok_or_else(|| {
                Error::Injection("mimic strategy requires an outage value model".into())
            })?,
        ),
        ForgeStrategy::ForgeLowRsrp => None,
    };

    let mut rng = rng::seeded(spec.seed, rng::stream::ATTACK);
    // Partial Fisher-Yates picks victims; sorted order keeps value draws
    // aligned with dataset order for reproducibility.
    for k in 0..n_mal {
        let j = k + (rand::Rng::random_range(&mut rng, 0..(eligible.len() - k) as u64)) as usize;
        eligible.swap(k, j);
    }
    let mut victims: Vec<usize> = eligible[..n_mal].to_vec();
    victims.sort_unstable();

    for &idx in &victims {
        let r = &mut out.reports[idx];
        match model {
            None => forge_low_rsrp(r, spec, &mut rng),
            Some(m) => forge_mimic(r, m, &mut rng),
        }
        r.label = Label::Malicious;
    }
    Ok(out)
}

fn uniform_in(rng: &mut rng::ChaCha8Rng, low: f64, high: f64) -> f64 {
    low + rand::Rng::random::<f64>(rng) * (high - low)
}

fn sort_desc(values: &mut [f64]) {
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
}

fn forge_low_rsrp(r: &mut MdtReport, spec: &AttackSpec, rng: &mut rng::ChaCha8Rng) {
    let serving = uniform_in(rng, spec.forge_rsrp_low_dbm, spec.forge_rsrp_high_dbm);
    let serving_rsrq = uniform_in(rng, -19.5, -14.0);
    let mut neighbors = [0.0; NEIGHBOR_SLOTS];
    let mut neighbor_rsrq = [0.0; NEIGHBOR_SLOTS];
    for k in 0..NEIGHBOR_SLOTS {
        neighbors[k] = uniform_in(rng, serving - 10.0, serving + 3.0);
        neighbor_rsrq[k] = uniform_in(rng, serving_rsrq - 6.0, serving_rsrq + 2.0);
    }
    sort_desc(&mut neighbors);
    sort_desc(&mut neighbor_rsrq);
    r.serving_rsrp_dbm = crate::scenario::round6(serving);
    r.serving_rsrq_db = crate::scenario::round6(serving_rsrq);
    for k in 0..NEIGHBOR_SLOTS {
        r.neighbor_rsrp_dbm[k] = crate::scenario::round6(neighbors[k]);
        r.neighbor_rsrq_db[k] = crate::scenario::round6(neighbor_rsrq[k]);
    }
}

fn forge_mimic(r: &mut MdtReport, model: &OutageValueModel, rng: &mut rng::ChaCha8Rng) {
    r.serving_rsrp_dbm = model.draw(0, rng);
    r.serving_rsrq_db = model.draw(1, rng);
    let mut neighbors = [0.0; NEIGHBOR_SLOTS];
    let mut neighbor_rsrq = [0.0; NEIGHBOR_SLOTS];
    for k in 0..NEIGHBOR_SLOTS {
        neighbors[k] = model.draw(2 + k, rng);
        neighbor_rsrq[k] = model.draw(8 + k, rng);
    }
    // Independent per-slot draws can violate the slot ordering; restore it.
    sort_desc(&mut neighbors);
    sort_desc(&mut neighbor_rsrq);
    r.neighbor_rsrp_dbm = neighbors;
    r.neighbor_rsrq_db = neighbor_rsrq;
}

/// One independently injected dataset per rate, sharing the base reports.
pub fn sweep_malicious_rate(
    dataset: &Dataset,
    rates: &[f64],
    spec: &AttackSpec,
) -> Result<Vec<Dataset>> {
    for rate in rates {
        if !(0.05..=0.90).contains(rate) {
            return Err(Error::InvalidInput(format!(
                "sweep rates must lie in [0.05, 0.90], got {rate}"
            )));
        }
    }
    let model = match spec.strategy {
        ForgeStrategy::MimicOutageDistribution => Some(OutageValueModel::fit(dataset)?),
        ForgeStrategy::ForgeLowRsrp => None,
    };
    let mut out = Vec::with_capacity(rates.len());
    for (i, rate) in rates.iter().enumerate() {
        let mut rate_spec = spec.clone();
        rate_spec.malicious_fraction = *rate;
        rate_spec.seed = rng::mix(spec.seed, i as u64 + 1, 0x5EED);
        out.push(inject_malicious(dataset, &rate_spec, model.as_ref())?);
    }
    Ok(out)
}
