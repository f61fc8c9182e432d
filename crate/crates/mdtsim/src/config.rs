//! JSON experiment configuration.
//!
//! One document describes a full experiment: layout, scenario, attack, model
//! settings and SON/drive-tester parameters. Unknown keys are rejected, every
//! field has a default, and the resolved document (defaults filled in) is
//! written next to every run's outputs so results are self-describing.

use serde::{Deserialize, Serialize};

use crate::adm::{AeConfig, GbtConfig};
use crate::adversary::{AttackSpec, ForgeStrategy, TargetRegion};
use crate::digest;
use crate::error::{Error, Result};
use crate::geometry::{Area, Point};
use crate::mrfm::{LofParams, RegionalRule};
use crate::pipeline::{MrifOptions, SonRunConfig, ThresholdMode, TrainOptions};
use crate::radio::{CellSite, NetworkLayout, PathlossParams};
use crate::scenario::{ReportingMode, ScenarioConfig};
use crate::shadowing::ShadowingParams;
use crate::son::TriggerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub layout: LayoutSpec,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub adm: AdmConfig,
    #[serde(default)]
    pub mrfm: MrfmConfig,
    #[serde(default)]
    pub son: SonConfig,
    #[serde(default)]
    pub fdt: FdtConfig,
    /// Coverage-map pixel pitch for grid outputs, metres.
    #[serde(default = "default_map_resolution")]
    pub coverage_map_resolution_m: f64,
    /// Present on grid-evaluation presets.
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Present on fake-rate-sweep presets.
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_map_resolution() -> f64 {
    25.0
}

/// Regular site grid over a rectangular area, with per-site overrides for
/// heterogeneous deployments (small cells, pre-degraded sites).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub rows: usize,
    pub cols: usize,
    /// Area (width, height) in metres.
    pub area_m: [f64; 2],
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_bandwidth_rb")]
    pub bandwidth_rb: u32,
    #[serde(default = "default_noise")]
    pub noise_dbm_per_rb: f64,
    #[serde(default)]
    pub pathloss: PathlossParams,
    #[serde(default)]
    pub shadowing: ShadowingParams,
    #[serde(default)]
    pub overrides: Vec<SiteOverride>,
}

fn default_tx_power() -> f64 {
    46.0
}

fn default_bandwidth_rb() -> u32 {
    50
}

fn default_noise() -> f64 {
    // Thermal noise over one 180 kHz resource block plus a 9 dB noise figure.
    -112.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteOverride {
    pub id: u32,
    #[serde(default)]
    pub tx_power_dbm: Option<f64>,
    #[serde(default)]
    pub active: Option<bool>,
}

impl LayoutSpec {
    pub fn build(&self) -> Result<NetworkLayout> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("layout needs rows >= 1 and cols >= 1".into()));
        }
        let area = Area::new(self.area_m[0], self.area_m[1]);
        let mut sites = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                sites.push(CellSite {
                    id: (r * self.cols + c) as u32,
                    position: Point::new(
                        (c as f64 + 0.5) * area.width_m / self.cols as f64,
                        (r as f64 + 0.5) * area.height_m / self.rows as f64,
                    ),
                    tx_power_dbm: self.tx_power_dbm,
                    bandwidth_rb: self.bandwidth_rb,
                    active: true,
                });
            }
        }
        for o in &self.overrides {
            let idx = sites
                .iter()
                .position(|s| s.id == o.id)
                .ok_or_else(|| Error::Config(format!("override names unknown site {}", o.id)))?;
            if let Some(p) = o.tx_power_dbm {
                sites[idx].tx_power_dbm = p;
            }
            if let Some(a) = o.active {
                sites[idx].active = a;
            }
        }
        let layout = NetworkLayout {
            sites,
            area,
            noise_dbm_per_rb: self.noise_dbm_per_rb,
            pathloss: self.pathloss,
            shadowing: self.shadowing,
        };
        layout.validate()?;
        Ok(layout)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n_ues: usize,
    pub n_reports: usize,
    #[serde(default)]
    pub outage_cells: Vec<u32>,
    #[serde(default = "default_reporting_mode")]
    pub reporting_mode: ReportingMode,
    #[serde(default = "default_logged_period")]
    pub logged_period: u32,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u32,
}

fn default_reporting_mode() -> ReportingMode {
    ReportingMode::Immediate
}

fn default_logged_period() -> u32 {
    1
}

fn default_max_ticks() -> u32 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default = "default_strategy")]
    pub strategy: ForgeStrategy,
    #[serde(default = "default_malicious_fraction")]
    pub malicious_fraction: f64,
    #[serde(default)]
    pub target_region: Option<TargetRegionSpec>,
    #[serde(default = "default_forge_low")]
    pub forge_rsrp_low_dbm: f64,
    #[serde(default = "default_forge_high")]
    pub forge_rsrp_high_dbm: f64,
}

fn default_strategy() -> ForgeStrategy {
    ForgeStrategy::ForgeLowRsrp
}

fn default_malicious_fraction() -> f64 {
    0.01
}

fn default_forge_low() -> f64 {
    -140.0
}

fn default_forge_high() -> f64 {
    -120.0
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            strategy: default_strategy(),
            malicious_fraction: default_malicious_fraction(),
            target_region: None,
            forge_rsrp_low_dbm: default_forge_low(),
            forge_rsrp_high_dbm: default_forge_high(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetRegionSpec {
    pub center_m: [f64; 2],
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmConfig {
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub ae: AeConfig,
    #[serde(default)]
    pub gbt: GbtConfig,
}

fn default_test_fraction() -> f64 {
    0.3
}

impl Default for AdmConfig {
    fn default() -> Self {
        AdmConfig {
            test_fraction: default_test_fraction(),
            ae: AeConfig::default(),
            gbt: GbtConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MrfmConfig {
    #[serde(default)]
    pub lof: LofParams,
    #[serde(default)]
    pub regional: RegionalRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonConfig {
    #[serde(default)]
    pub trigger: TriggerConfig,
    #[serde(default = "default_boost")]
    pub power_boost_db: f64,
    #[serde(default = "default_n_compensating")]
    pub n_compensating: usize,
    #[serde(default = "default_coverage_threshold")]
    pub coverage_threshold_db: f64,
}

fn default_boost() -> f64 {
    3.0
}

fn default_n_compensating() -> usize {
    3
}

fn default_coverage_threshold() -> f64 {
    crate::son::COVERAGE_SINR_THRESHOLD_DB
}

impl Default for SonConfig {
    fn default() -> Self {
        SonConfig {
            trigger: TriggerConfig::default(),
            power_boost_db: default_boost(),
            n_compensating: default_n_compensating(),
            coverage_threshold_db: default_coverage_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdtConfig {
    #[serde(default = "default_fleet_size")]
    pub fleet_size: usize,
    #[serde(default = "default_speed")]
    pub speed_mps: f64,
    #[serde(default = "default_floor")]
    pub confirmation_floor_dbm: f64,
    #[serde(default = "default_sparse_fraction")]
    pub sparse_fraction: f64,
}

fn default_fleet_size() -> usize {
    3
}

fn default_speed() -> f64 {
    10.0
}

fn default_floor() -> f64 {
    -115.0
}

fn default_sparse_fraction() -> f64 {
    0.05
}

impl Default for FdtConfig {
    fn default() -> Self {
        FdtConfig {
            fleet_size: default_fleet_size(),
            speed_mps: default_speed(),
            confirmation_floor_dbm: default_floor(),
            sparse_fraction: default_sparse_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub sizes: Vec<usize>,
    pub severities: Vec<usize>,
    /// Severity v deactivates the first v cells of this list.
    pub outage_prefix: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `[start, end, step]` over the forged-report rate.
    pub rate_range: [f64; 3],
}

impl SweepConfig {
    pub fn rates(&self) -> Result<Vec<f64>> {
        expand_rate_range(self.rate_range[0], self.rate_range[1], self.rate_range[2])
    }
}

/// Expands `start:end:step` into the inclusive rate list.
pub fn expand_rate_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || end < start {
        return Err(Error::Config(format!(
            "bad rate range {start}:{end}:{step}"
        )));
    }
    let mut rates = Vec::new();
    let mut k = 0usize;
    loop {
        let r = start + step * k as f64;
        if r > end + 1e-9 {
            break;
        }
        rates.push((r * 1e9).round() / 1e9);
        k += 1;
    }
    Ok(rates)
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&json).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario_config()?.validate()?;
        self.attack_spec().validate()?;
        if let Some(grid) = &self.grid {
            if grid.sizes.is_empty() || grid.severities.is_empty() {
                return Err(Error::Config("grid needs sizes and severities".into()));
            }
            let max_severity = *grid.severities.iter().max().unwrap();
            if grid.outage_prefix.len() < max_severity {
                return Err(Error::Config(format!(
                    "grid outage prefix holds {} cells, severity needs {max_severity}",
                    grid.outage_prefix.len()
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            sweep.rates()?;
        }
        if self.fdt.fleet_size == 0 {
            return Err(Error::Config("fdt fleet_size must be >= 1".into()));
        }
        Ok(())
    }

    /// The resolved document with every default filled in.
    pub fn resolved_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn layout(&self) -> Result<NetworkLayout> {
        self.layout.build()
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            layout: self.layout.build()?,
            n_ues: self.scenario.n_ues,
            n_reports: self.scenario.n_reports,
            outage_cells: self.scenario.outage_cells.clone(),
            reporting_mode: self.scenario.reporting_mode,
            logged_period: self.scenario.logged_period,
            max_ticks: self.scenario.max_ticks,
            rng_seed: self.seed,
        })
    }

    pub fn attack_spec(&self) -> AttackSpec {
        AttackSpec {
            strategy: self.attack.strategy,
            malicious_fraction: self.attack.malicious_fraction,
            target_region: self.attack.target_region.map(|t| TargetRegion {
                center: Point::new(t.center_m[0], t.center_m[1]),
                radius_m: t.radius_m,
            }),
            seed: crate::rng::mix(self.seed, 0xA77AC4, 0),
            forge_rsrp_low_dbm: self.attack.forge_rsrp_low_dbm,
            forge_rsrp_high_dbm: self.attack.forge_rsrp_high_dbm,
        }
    }

    /// Digest identifying the generation inputs (scenario plus attack).
    pub fn generation_digest(&self) -> Result<String> {
        digest::of(&(self.scenario_config()?, self.attack_spec()))
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            test_fraction: self.adm.test_fraction,
            ae: self.adm.ae.clone(),
            gbt: self.adm.gbt.clone(),
            lof: self.mrfm.lof,
            regional: self.mrfm.regional,
            seed: self.seed,
        }
    }

    pub fn mrif_options(&self, use_fdt: bool) -> MrifOptions {
        MrifOptions {
            threshold_mode: ThresholdMode::Adaptive,
            anomaly_ratio: None,
            use_fdt,
            fdt_threshold_fraction: self.fdt.sparse_fraction,
            fdt_floor_dbm: self.fdt.confirmation_floor_dbm,
            check_digest: true,
        }
    }

    pub fn son_run_config(&self) -> SonRunConfig {
        SonRunConfig {
            trigger: self.son.trigger,
            power_boost_db: self.son.power_boost_db,
            n_compensating: self.son.n_compensating,
            coverage_threshold_db: self.son.coverage_threshold_db,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "name": "demo",
            "seed": 7,
            "layout": { "rows": 3, "cols": 3, "area_m": [1000.0, 1000.0] },
            "scenario": { "n_ues": 100, "n_reports": 300, "outage_cells": [0] }
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let config = ExperimentConfig::from_json(&minimal_json()).unwrap();
        assert_eq!(config.adm.ae.hidden_widths, vec![8, 4, 8]);
        assert_eq!(config.mrfm.lof.n_neighbors, 15);
        assert_eq!(config.mrfm.lof.contamination, 0.15);
        assert_eq!(config.son.power_boost_db, 3.0);
        assert_eq!(config.fdt.fleet_size, 3);
        let layout = config.layout().unwrap();
        assert_eq!(layout.sites.len(), 9);
        assert!(layout.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = minimal_json().replace("\"seed\": 7,", "\"seed\": 7, \"surprise\": 1,");
        let err = ExperimentConfig::from_json(&json).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("surprise"), "{msg}"),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn missing_required_field_is_a_config_error() {
        let json = minimal_json().replace("\"n_ues\": 100,", "");
        let err = ExperimentConfig::from_json(&json).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("n_ues"), "{msg}"),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn resolved_json_round_trips() {
        let config = ExperimentConfig::from_json(&minimal_json()).unwrap();
        let resolved = config.resolved_json().unwrap();
        let back = ExperimentConfig::from_json(&resolved).unwrap();
        assert_eq!(config, back);
        assert_eq!(
            config.generation_digest().unwrap(),
            back.generation_digest().unwrap()
        );
    }

    #[test]
    fn layout_overrides_apply() {
        let json = minimal_json().replace(
            "\"area_m\": [1000.0, 1000.0]",
            "\"area_m\": [1000.0, 1000.0], \"overrides\": [{\"id\": 2, \"tx_power_dbm\": 28.0}]",
        );
        let config = ExperimentConfig::from_json(&json).unwrap();
        let layout = config.layout().unwrap();
        assert_eq!(layout.sites[2].tx_power_dbm, 28.0);
        assert_eq!(layout.sites[1].tx_power_dbm, 46.0);
    }

    #[test]
    fn rate_range_expansion() {
        let rates = expand_rate_range(0.05, 0.90, 0.05).unwrap();
        assert_eq!(rates.len(), 18);
        assert!((rates[0] - 0.05).abs() < 1e-12);
        assert!((rates[17] - 0.90).abs() < 1e-12);
        assert!(expand_rate_range(0.9, 0.1, 0.05).is_err());
    }
}
