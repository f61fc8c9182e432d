//! Desk-scale simulator for MDT-driven network automation and its abuse.
//!
//! The crate models a small multi-cell radio network whose UEs produce MDT
//! measurement reports, lets an adversary forge outage reports from healthy
//! locations, shows how a trusting SON cell-outage-compensation loop degrades
//! SINR when fooled, and implements a two-stage defense (anomaly detection +
//! malicious-report filtering) with optional drone re-measurement:
//!
//! - [`radio`] / [`shadowing`]: pathloss, spatially correlated shadowing,
//!   RSRP/RSRQ/SINR and coverage grids.
//! - [`scenario`]: UE deployment, report generation, labeling, CSV datasets.
//! - [`adversary`]: cell outages and forged-report injection.
//! - [`son`]: outage triggering, cell outage compensation, KPI evaluation.
//! - [`learn`]: matrices, standardization, PCA, splits, metrics.
//! - [`adm`]: autoencoder + gradient-boosted-tree anomaly detectors.
//! - [`mrfm`]: PCA-assisted local-outlier-factor filtering and the
//!   regional neighbor-count rule.
//! - [`fdt`]: drive-tester placement, dispatch and verification.
//! - [`pipeline`]: the end-to-end report screening flow and guarded SON.
//! - [`config`]: JSON experiment configuration shared with the CLI.
//!
//! All randomness flows through seeded ChaCha8 streams ([`rng`]); a fixed
//! (config, seed) pair reproduces every output bit for bit.

pub mod adm;
pub mod adversary;
pub mod config;
pub mod digest;
pub mod error;
pub mod fdt;
pub mod geometry;
pub mod learn;
pub mod mrfm;
pub mod pipeline;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod shadowing;
pub mod son;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
