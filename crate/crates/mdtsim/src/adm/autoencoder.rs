//! Fully connected autoencoder trained with mini-batch gradient descent on
//! mean squared reconstruction error. Hidden layers use tanh, the output is
//! linear. Written out directly (no framework) so the gradients can be checked
//! against finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{quantile_interpolated, FeatureMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    /// Hidden layer widths; must be mirror-symmetric (encoder = reversed decoder).
    pub hidden_widths: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig {
            hidden_widths: vec![8, 4, 8],
            epochs: 60,
            learning_rate: 0.05,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl AeConfig {
    pub fn validate(&self) -> Result<()> {
        let mirrored: Vec<usize> = self.hidden_widths.iter().rev().cloned().collect();
        if self.hidden_widths != mirrored {
            return Err(Error::Config(format!(
                "autoencoder hidden widths must be mirror-symmetric, got {:?}",
                self.hidden_widths
            )));
        }
        if self.hidden_widths.iter().any(|w| *w == 0) {
            return Err(Error::Config("hidden widths must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Dense feed-forward network, tanh hidden layers, linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    /// Layer widths including input and output.
    pub widths: Vec<usize>,
    /// Per layer, row-major `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Net {
    /// Glorot-uniform initialization, deterministic per generator state.
    pub fn init(widths: &[usize], rng: &mut rng::ChaCha8Rng) -> Net {
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let scale = (6.0 / (n_in + n_out) as f64).sqrt();
            let w: Vec<f64> = (0..n_in * n_out)
                .map(|_| (rand::Rng::random::<f64>(rng) * 2.0 - 1.0) * scale)
                .collect();
            weights.push(w);
            biases.push(vec![0.0; n_out]);
        }
        Net {
            widths: widths.to_vec(),
            weights,
            biases,
        }
    }

    fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Activations per layer, index 0 = input.
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut activations = Vec::with_capacity(self.widths.len());
        activations.push(input.to_vec());
        for l in 0..self.n_layers() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let prev = &activations[l];
            let mut a = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut z = self.biases[l][o];
                for (w, x) in row.iter().zip(prev.iter()) {
                    z += w * x;
                }
                a[o] = if l + 1 == self.n_layers() { z } else { z.tanh() };
            }
            activations.push(a);
        }
        activations
    }

    /// Reconstruction of one row.
    pub fn reconstruct(&self, input: &[f64]) -> Vec<f64> {
        self.forward(input).pop().unwrap()
    }

    /// Mean squared reconstruction error of one row.
    pub fn row_error(&self, input: &[f64]) -> f64 {
        let out = self.reconstruct(input);
        let n = input.len() as f64;
        out.iter()
            .zip(input.iter())
            .map(|(y, x)| (y - x) * (y - x))
            .sum::<f64>()
            / n
    }

    /// Mean loss and mean gradients over a batch of rows.
    pub fn batch_gradients(
        &self,
        rows: &FeatureMatrix,
        batch: &[usize],
    ) -> (f64, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut grad_w: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut grad_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut loss = 0.0;
        let n_out = *self.widths.last().unwrap() as f64;

        for &r in batch {
            let x = rows.row(r);
            let acts = self.forward(x);
            let y = acts.last().unwrap();
            loss += y
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / n_out;

            // Output delta for L = mean squared error over dimensions.
            let mut delta: Vec<f64> = y
                .iter()
                .zip(x.iter())
                .map(|(a, b)| 2.0 * (a - b) / n_out)
                .collect();

            for l in (0..self.n_layers()).rev() {
                let n_in = self.widths[l];
                let prev = &acts[l];
                for o in 0..self.widths[l + 1] {
                    let d = delta[o];
                    grad_b[l][o] += d;
                    let row = &mut grad_w[l][o * n_in..(o + 1) * n_in];
                    for (g, x_i) in row.iter_mut().zip(prev.iter()) {
                        *g += d * x_i;
                    }
                }
                if l > 0 {
                    // Backpropagate through W_l and the tanh of layer l.
                    let mut next = vec![0.0; n_in];
                    for o in 0..self.widths[l + 1] {
                        let d = delta[o];
                        let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                        for (acc, w) in next.iter_mut().zip(row.iter()) {
                            *acc += d * w;
                        }
                    }
                    for (acc, a) in next.iter_mut().zip(acts[l].iter()) {
                        *acc *= 1.0 - a * a;
                    }
                    delta = next;
                }
            }
        }

        let scale = 1.0 / batch.len() as f64;
        loss *= scale;
        for layer in grad_w.iter_mut().chain(grad_b.iter_mut()) {
            for g in layer {
                *g *= scale;
            }
        }
        (loss, grad_w, grad_b)
    }

    fn apply_gradients(
        &mut self,
        grad_w: &[Vec<f64>],
        grad_b: &[Vec<f64>],
        velocity_w: &mut [Vec<f64>],
        velocity_b: &mut [Vec<f64>],
        lr: f64,
    ) {
        for l in 0..self.n_layers() {
            for ((w, g), v) in self.weights[l]
                .iter_mut()
                .zip(grad_w[l].iter())
                .zip(velocity_w[l].iter_mut())
            {
                *v = MOMENTUM * *v - lr * g;
                *w += *v;
            }
            for ((b, g), v) in self.biases[l]
                .iter_mut()
                .zip(grad_b[l].iter())
                .zip(velocity_b[l].iter_mut())
            {
                *v = MOMENTUM * *v - lr * g;
                *b += *v;
            }
        }
    }
}

/// Classical momentum coefficient of the mini-batch descent.
const MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub net: Net,
    pub config: AeConfig,
    /// Reconstruction-error decision threshold; `None` until calibrated.
    pub reconstruction_threshold: Option<f64>,
    pub initial_epoch_loss: f64,
    pub final_epoch_loss: f64,
}

/// Trains the autoencoder on normal (standardized) rows.
pub fn ae_train(normal_rows: &FeatureMatrix, config: &AeConfig) -> Result<AutoencoderModel> {
    config.validate()?;
    if normal_rows.rows() < 100 {
        return Err(Error::InvalidInput(format!(
            "autoencoder training needs >= 100 rows, got {}",
            normal_rows.rows()
        )));
    }
    let n_features = normal_rows.cols();
    let mut widths = vec![n_features];
    widths.extend_from_slice(&config.hidden_widths);
    widths.push(n_features);

    let mut rng = rng::seeded(config.seed, rng::stream::AUTOENCODER);
    let mut net = Net::init(&widths, &mut rng);

    let n = normal_rows.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut initial_epoch_loss = f64::NAN;
    let mut final_epoch_loss = f64::NAN;
    let mut velocity_w: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut velocity_b: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();

    for epoch in 0..config.epochs {
        // Fisher-Yates reshuffle per epoch, order fixed by the seed.
        for k in 0..n.saturating_sub(1) {
            let j = k + (rand::Rng::random_range(&mut rng, 0..(n - k) as u64)) as usize;
            order.swap(k, j);
        }
        // Exponential decay to lr/10 over the run shrinks the SGD noise ball.
        let lr = config.learning_rate
            * LR_END_FACTOR.powf(epoch as f64 / config.epochs.max(1) as f64);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(config.batch_size) {
            let (loss, grad_w, grad_b) = net.batch_gradients(normal_rows, batch);
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    msg: format!("loss diverged to {loss}"),
                });
            }
            net.apply_gradients(&grad_w, &grad_b, &mut velocity_w, &mut velocity_b, lr);
            epoch_loss += loss;
            batches += 1;
        }
        epoch_loss /= batches as f64;
        if epoch == 0 {
            initial_epoch_loss = epoch_loss;
        }
        final_epoch_loss = epoch_loss;
    }

    if config.epochs == 0 {
        // Untouched initialization; record its loss for reporting.
        let all: Vec<usize> = (0..n).collect();
        let (loss, _, _) = net.batch_gradients(normal_rows, &all);
        initial_epoch_loss = loss;
        final_epoch_loss = loss;
    }

    Ok(AutoencoderModel {
        net,
        config: config.clone(),
        reconstruction_threshold: None,
        initial_epoch_loss,
        final_epoch_loss,
    })
}

/// Per-row mean squared reconstruction error.
pub fn ae_reconstruction_error(model: &AutoencoderModel, rows: &FeatureMatrix) -> Vec<f64> {
    (0..rows.rows()).map(|r| model.net.row_error(rows.row(r))).collect()
}

/// Upper-tail threshold: the `(1 - outage_ratio)` quantile of the error
/// distribution, linearly interpolated. Errors above it are flagged.
pub fn ae_calibrate_threshold(errors: &[f64], outage_ratio: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::InvalidInput("no errors to calibrate on".into()));
    }
    if !(0.0 < outage_ratio && outage_ratio < 0.5) {
        return Err(Error::InvalidInput(format!(
            "outage ratio must lie in (0, 0.5), got {outage_ratio}"
        )));
    }
    quantile_interpolated(errors, 1.0 - outage_ratio)
}

/// Flags rows whose reconstruction error strictly exceeds the threshold;
/// rows exactly at the threshold stay normal.
pub fn ae_classify(model: &AutoencoderModel, rows: &FeatureMatrix) -> Result<Vec<bool>> {
    let threshold = model
        .reconstruction_threshold
        .ok_or_else(|| Error::State("autoencoder threshold not calibrated".into()))?;
    Ok(ae_reconstruction_error(model, rows)
        .into_iter()
        .map(|e| e > threshold)
        .collect())
}
