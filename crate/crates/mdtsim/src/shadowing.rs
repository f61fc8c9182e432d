//! Spatially correlated shadowing.
//!
//! Shadow fading is modeled as a zero-mean joint Gaussian over a fixed set of
//! positions with exponential correlation `rho(d) = exp(-d / d_corr)` and
//! variance `sigma^2`. One draw is one environment realization; every UE,
//! grid pixel and drive-tester measurement in a scenario reads from the same
//! realization so that modules see a consistent world.
//!
//! Sampling factorizes the covariance once (Cholesky) and reuses the factor
//! for per-site field draws, which keeps a 9-site scenario at one `O(n^3)`
//! factorization instead of nine.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{self, ChaCha8Rng};

/// Log-normal shadowing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowingParams {
    /// Standard deviation of the shadow fading, dB.
    pub sigma_db: f64,
    /// Distance at which correlation falls to 1/e, metres.
    pub decorrelation_distance_m: f64,
}

impl Default for ShadowingParams {
    fn default() -> Self {
        ShadowingParams {
            sigma_db: 8.0,
            decorrelation_distance_m: 50.0,
        }
    }
}

/// Default cap on the joint position count; beyond this the covariance matrix
/// does not fit desk-scale memory and callers must tile their queries.
pub const DEFAULT_POSITION_CAP: usize = 20_000;

/// Relative diagonal jitter keeping the correlation matrix positive definite.
const DIAGONAL_JITTER: f64 = 1e-9;

/// One joint draw of the shadowing field over `positions`, deterministic per seed.
pub fn sample_shadowing_field(
    positions: &[Point],
    params: &ShadowingParams,
    seed: u64,
) -> Result<Vec<f64>> {
    let sampler = ShadowingSampler::new(positions, params, DEFAULT_POSITION_CAP)?;
    let mut rng = rng::seeded(seed, rng::stream::SHADOWING);
    Ok(sampler.sample(&mut rng))
}

/// Reusable sampler holding the Cholesky factor of the field covariance.
#[derive(Debug, Clone)]
pub struct ShadowingSampler {
    n: usize,
    sigma_db: f64,
    /// Lower-triangular factor of the covariance, row-major n x n.
    /// Empty when sigma = 0 (degenerate all-zero field).
    chol: Vec<f64>,
}

impl ShadowingSampler {
    pub fn new(positions: &[Point], params: &ShadowingParams, cap: usize) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::InvalidInput("shadowing needs >= 1 position".into()));
        }
        if n > cap {
            return Err(Error::Capacity { requested: n, cap });
        }
        if !params.sigma_db.is_finite() || params.sigma_db < 0.0 {
            return Err(Error::InvalidInput(format!(
                "shadowing sigma must be finite and >= 0, got {}",
                params.sigma_db
            )));
        }
        if !(params.decorrelation_distance_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "decorrelation distance must be > 0, got {}",
                params.decorrelation_distance_m
            )));
        }
        if params.sigma_db == 0.0 {
            return Ok(ShadowingSampler {
                n,
                sigma_db: 0.0,
                chol: Vec::new(),
            });
        }

        let var = params.sigma_db * params.sigma_db;
        let d_corr = params.decorrelation_distance_m;
        let mut cov = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let c = var * (-positions[i].distance(&positions[j]) / d_corr).exp();
                cov[i * n + j] = c;
                cov[j * n + i] = c;
            }
            cov[i * n + i] += DIAGONAL_JITTER * var;
        }
        let chol = cholesky_lower(cov, n)?;
        Ok(ShadowingSampler {
            n,
            sigma_db: params.sigma_db,
            chol,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One field draw: `L z` with `z ~ N(0, I)`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.sigma_db == 0.0 {
            // Still consume n draws so downstream streams stay aligned.
            for _ in 0..self.n {
                let _: f64 = StandardNormal.sample(rng);
            }
            return vec![0.0; self.n];
        }
        let n = self.n;
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let mut out = vec![0.0f64; n];
        for i in 0..n {
            let row = &self.chol[i * n..i * n + i + 1];
            let mut acc = 0.0;
            for (l, zj) in row.iter().zip(z.iter()) {
                acc += l * zj;
            }
            out[i] = acc;
        }
        out
    }

    /// Kriging weights `alpha = K^{-1} field` for conditional-mean queries at
    /// positions outside the sampled set.
    pub fn kriging_weights(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "field length {} != position count {}",
                field.len(),
                self.n
            )));
        }
        if self.sigma_db == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let n = self.n;
        // Forward solve L y = f, then backward solve L^T alpha = y.
        let mut y = field.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.chol[i * n + j] * y[j];
            }
            y[i] = acc / self.chol[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.chol[j * n + i] * y[j];
            }
            y[i] = acc / self.chol[i * n + i];
        }
        Ok(y)
    }
}

fn cholesky_lower(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            let v = a[j * n + k];
            diag -= v * v;
        }
        if !(diag > 0.0) {
            return Err(Error::InvalidInput(format!(
                "covariance not positive definite at pivot {j}"
            )));
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut acc = a[i * n + j];
            for k in 0..j {
                acc -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = acc / diag;
        }
    }
    // Zero the strict upper triangle so the factor is exactly lower-triangular.
    for i in 0..n {
        for j in i + 1..n {
            a[i * n + j] = 0.0;
        }
    }
    Ok(a)
}

/// Per-site shadowing realizations over one shared position set.
///
/// Sites radiate through independent shadow fields (the spatial correlation is
/// across positions, not across sites), so each site gets its own draw from
/// the same factorized covariance.
pub struct SiteFields {
    positions: Vec<Point>,
    params: ShadowingParams,
    /// `per_site[s][i]` = shadow (dB) from site `s` at position `i`.
    per_site: Vec<Vec<f64>>,
    /// Kriging weights per site, for conditional-mean queries off the grid.
    alphas: Vec<Vec<f64>>,
}

impl SiteFields {
    /// Draws `n_sites` independent field realizations over `positions`.
    pub fn sample(
        positions: &[Point],
        n_sites: usize,
        params: &ShadowingParams,
        seed: u64,
        cap: usize,
    ) -> Result<Self> {
        let sampler = ShadowingSampler::new(positions, params, cap)?;
        let mut rng = rng::seeded(seed, rng::stream::SHADOWING);
        let mut per_site = Vec::with_capacity(n_sites);
        let mut alphas = Vec::with_capacity(n_sites);
        for _ in 0..n_sites {
            let field = sampler.sample(&mut rng);
            alphas.push(sampler.kriging_weights(&field)?);
            per_site.push(field);
        }
        Ok(SiteFields {
            positions: positions.to_vec(),
            params: *params,
            per_site,
            alphas,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn n_sites(&self) -> usize {
        self.per_site.len()
    }

    /// Shadow value from `site` at sampled position `pos_index`.
    pub fn value(&self, site: usize, pos_index: usize) -> f64 {
        self.per_site[site][pos_index]
    }

    /// Per-site shadow vector at sampled position `pos_index`.
    pub fn shadow_vector(&self, pos_index: usize) -> Vec<f64> {
        self.per_site.iter().map(|f| f[pos_index]).collect()
    }

    /// Conditional mean of the field at an arbitrary point, consistent with
    /// this realization (kriging through the sampled positions).
    pub fn value_at(&self, site: usize, query: &Point) -> f64 {
        if self.params.sigma_db == 0.0 {
            return 0.0;
        }
        let var = self.params.sigma_db * self.params.sigma_db;
        let d_corr = self.params.decorrelation_distance_m;
        let alpha = &self.alphas[site];
        let mut acc = 0.0;
        for (p, a) in self.positions.iter().zip(alpha.iter()) {
            acc += var * (-query.distance(p) / d_corr).exp() * a;
        }
        acc
    }

    pub fn shadow_vector_at(&self, query: &Point) -> Vec<f64> {
        (0..self.n_sites()).map(|s| self.value_at(s, query)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sigma: f64, d_corr: f64) -> ShadowingParams {
        ShadowingParams {
            sigma_db: sigma,
            decorrelation_distance_m: d_corr,
        }
    }

    #[test]
    fn coincident_points_share_shadow() {
        let positions = [Point::new(10.0, 10.0), Point::new(10.0, 10.0)];
        let field = sample_shadowing_field(&positions, &params(8.0, 50.0), 3).unwrap();
        assert!(
            (field[0] - field[1]).abs() < 1e-4,
            "coincident points must draw (near-)identical shadow, got {} vs {}",
            field[0],
            field[1]
        );
    }

    #[test]
    fn zero_sigma_gives_zero_field() {
        let positions = [Point::new(0.0, 0.0), Point::new(5.0, 0.0)];
        let field = sample_shadowing_field(&positions, &params(0.0, 50.0), 1).unwrap();
        assert_eq!(field, vec![0.0, 0.0]);
    }

    #[test]
    fn deterministic_per_seed() {
        let positions: Vec<Point> = (0..20)
            .map(|i| Point::new(i as f64 * 13.0, (i % 5) as f64 * 31.0))
            .collect();
        let a = sample_shadowing_field(&positions, &params(8.0, 50.0), 99).unwrap();
        let b = sample_shadowing_field(&positions, &params(8.0, 50.0), 99).unwrap();
        let c = sample_shadowing_field(&positions, &params(8.0, 50.0), 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let positions: Vec<Point> = (0..11).map(|i| Point::new(i as f64, 0.0)).collect();
        let err = ShadowingSampler::new(&positions, &params(8.0, 50.0), 10).unwrap_err();
        match err {
            Error::Capacity { requested, cap } => {
                assert_eq!((requested, cap), (11, 10));
            }
            other => panic!("expected capacity error, got {other}"),
        }
    }

    #[test]
    fn correlation_at_decorrelation_distance_matches_target() {
        // Monte-Carlo estimate of corr(f(0), f(d_corr)) across seeds vs exp(-1).
        let positions = [Point::new(0.0, 0.0), Point::new(50.0, 0.0)];
        let p = params(8.0, 50.0);
        let sampler = ShadowingSampler::new(&positions, &p, 100).unwrap();
        let n = 10_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut rng = rng::seeded(7, rng::stream::SHADOWING);
        for _ in 0..n {
            let f = sampler.sample(&mut rng);
            sx += f[0];
            sy += f[1];
            sxx += f[0] * f[0];
            syy += f[1] * f[1];
            sxy += f[0] * f[1];
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let vx = sxx / nf - (sx / nf) * (sx / nf);
        let vy = syy / nf - (sy / nf) * (sy / nf);
        let corr = cov / (vx * vy).sqrt();
        let target = (-1.0f64).exp();
        assert!(
            (corr - target).abs() < 0.03,
            "empirical correlation {corr:.4} vs target {target:.4}"
        );
    }

    #[test]
    fn kriging_reproduces_field_at_sampled_points() {
        let positions: Vec<Point> = (0..12)
            .map(|i| Point::new((i * 37 % 100) as f64, (i * 53 % 100) as f64))
            .collect();
        let fields = SiteFields::sample(&positions, 2, &params(8.0, 50.0), 5, 100).unwrap();
        for (i, pos) in positions.iter().enumerate() {
            let direct = fields.value(1, i);
            let kriged = fields.value_at(1, pos);
            assert!(
                (direct - kriged).abs() < 1e-5,
                "kriging must interpolate sampled points: {direct} vs {kriged}"
            );
        }
    }

    #[test]
    fn site_fields_are_distinct_realizations() {
        let positions: Vec<Point> = (0..8).map(|i| Point::new(i as f64 * 40.0, 0.0)).collect();
        let fields = SiteFields::sample(&positions, 3, &params(8.0, 50.0), 11, 100).unwrap();
        assert_ne!(fields.per_site[0], fields.per_site[1]);
        assert_ne!(fields.per_site[1], fields.per_site[2]);
    }
}
