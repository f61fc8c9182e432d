//! Anomaly Detection Module: an autoencoder whose reconstruction error is
//! thresholded at an outage-ratio quantile, and a gradient-boosted tree
//! ensemble as the supervised comparator.

mod autoencoder;
mod gbt;
mod grid;

pub use autoencoder::{
    ae_calibrate_threshold, ae_classify, ae_reconstruction_error, ae_train, AeConfig,
    AutoencoderModel, Net,
};
pub use gbt::{gbt_predict, gbt_train, GbtConfig, GbtModel};
pub use grid::{evaluate_grid, grid_to_csv, GridCell, GridSpec};
