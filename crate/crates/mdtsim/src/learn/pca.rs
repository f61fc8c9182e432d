//! Principal component analysis over a cyclic Jacobi eigensolver.
//!
//! Feature matrices here are at most 16 columns wide, so the covariance
//! eigenproblem is tiny; Jacobi rotations give machine-precision eigenpairs
//! without pulling in a linear-algebra backend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    /// Top-k eigenvectors of the sample covariance, one `Vec<f64>` (length =
    /// input cols) per component, orthonormal, eigenvalue-descending.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues matching `components`.
    pub explained_variance: Vec<f64>,
    /// Eigenvalue share of the total variance, per component.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaBasis {
    pub fn k(&self) -> usize {
        self.components.len()
    }
}

/// Fits the top-`k` principal components of the sample covariance of `data`.
pub fn pca_fit(data: &FeatureMatrix, k: usize) -> Result<PcaBasis> {
    let (n, cols) = (data.rows(), data.cols());
    if k > cols {
        return Err(Error::InvalidInput(format!(
            "pca k={k} exceeds column count {cols}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "pca needs >= 2 rows, got {n}"
        )));
    }

    let mut mean = vec![0.0; cols];
    for r in 0..n {
        for (c, v) in data.row(r).iter().enumerate() {
            mean[c] += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // Sample covariance (ddof = 1).
    let mut cov = vec![0.0; cols * cols];
    for r in 0..n {
        let row = data.row(r);
        for i in 0..cols {
            let di = row[i] - mean[i];
            for j in i..cols {
                cov[i * cols + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..cols {
        for j in i..cols {
            let v = cov[i * cols + j] / denom;
            cov[i * cols + j] = v;
            cov[j * cols + i] = v;
        }
    }

    let (eigvals, eigvecs) = jacobi_eigen_sym(&cov, cols);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eigvals[b].partial_cmp(&eigvals[a]).unwrap().then(a.cmp(&b)));

    let total: f64 = eigvals.iter().map(|v| v.max(0.0)).sum();
    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut vec_: Vec<f64> = (0..cols).map(|r| eigvecs[r * cols + idx]).collect();
        // Sign convention: largest-magnitude entry positive, for determinism.
        let lead = vec_
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap().then(b.0.cmp(&a.0)))
            .map(|(_, v)| v)
            .unwrap_or(1.0);
        if lead < 0.0 {
            for v in &mut vec_ {
                *v = -*v;
            }
        }
        components.push(vec_);
        explained.push(eigvals[idx]);
        ratios.push(if total > 0.0 { eigvals[idx].max(0.0) / total } else { 0.0 });
    }

    Ok(PcaBasis {
        mean,
        components,
        explained_variance: explained,
        explained_variance_ratio: ratios,
    })
}

/// Projects rows onto the basis: `(x - mean) . component_j`.
pub fn pca_project(basis: &PcaBasis, data: &FeatureMatrix) -> Result<FeatureMatrix> {
    if data.cols() != basis.mean.len() {
        return Err(Error::InvalidInput(format!(
            "pca projection expects {} columns, got {}",
            basis.mean.len(),
            data.cols()
        )));
    }
    let k = basis.k();
    let mut out = Vec::with_capacity(data.rows() * k);
    for r in 0..data.rows() {
        let row = data.row(r);
        for comp in &basis.components {
            let mut acc = 0.0;
            for ((v, m), w) in row.iter().zip(basis.mean.iter()).zip(comp.iter()) {
                acc += (v - m) * w;
            }
            out.push(acc);
        }
    }
    FeatureMatrix::new(data.rows(), k, out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major `n x n`).
/// Returns (eigenvalues, eigenvectors column-major in a row-major buffer:
/// element `[r * n + c]` is row `r` of eigenvector `c`).
pub fn jacobi_eigen_sym(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a, n)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigvals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (eigvals, v)
}

fn frobenius(a: &[f64], n: usize) -> f64 {
    (0..n * n).map(|i| a[i] * a[i]).sum::<f64>().sqrt()
}
