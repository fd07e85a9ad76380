//! Latent-space bridging between two reference vectors: a SLERP grid,
//! Gaussian perturbation around each grid point, the coarse noise scan and
//! production runs.

mod run;

pub use run::{
    bridge_run, bridge_run_with, write_header, write_record, noise_scan, BridgeRecord, GenerationSet, ScanResult, SigmaStats,
    DEFAULT_SCAN_SIGMAS,
};

use crate::decoder::DecoderError;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LATENT_DIM: usize = 150;
/// Angles below this are treated as parallel and interpolated linearly.
pub const PARALLEL_EPS: f64 = 1e-9;
/// Angles within this of pi have no unique great circle.
pub const ANTIPODAL_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("undefined great-circle: vectors are antipodal")]
    Antipodal,
    #[error("latent dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("sigma must be finite and non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadT(f64),
    #[error("invalid bridge config: {0}")]
    Config(String),
    #[error("decoder failed: {0}")]
    Decoder(#[from] DecoderError),
    #[error("malformed generation set line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentVector {
    pub components: Vec<f64>,
}

impl LatentVector {
    pub fn new(components: Vec<f64>) -> LatentVector {
        LatentVector { components }
    }

    pub fn zeros(dim: usize) -> LatentVector {
        LatentVector { components: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn dot(&self, other: &LatentVector) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|x| x.is_finite())
    }
}

fn combine(a: &LatentVector, wa: f64, b: &LatentVector, wb: f64) -> LatentVector {
    LatentVector::new(a.components.iter().zip(&b.components).map(|(x, y)| wa * x + wb * y).collect())
}

/// Spherical interpolation; `t = 0` and `t = 1` return the endpoints exactly.
pub fn slerp(a: &LatentVector, b: &LatentVector, t: f64) -> Result<LatentVector, BridgeError> {
    if a.dim() != b.dim() {
        return Err(BridgeError::DimensionMismatch(a.dim(), b.dim()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(BridgeError::BadT(t));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(BridgeError::ZeroVector);
    }
    let omega = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos();
    if std::f64::consts::PI - omega < ANTIPODAL_EPS {
        return Err(BridgeError::Antipodal);
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    if omega < PARALLEL_EPS {
        return Ok(combine(a, 1.0 - t, b, t));
    }
    let s = omega.sin();
    Ok(combine(a, ((1.0 - t) * omega).sin() / s, b, (t * omega).sin() / s))
}

/// Grid parameter for point `k` of `n_grid`.
pub fn grid_t(k: usize, n_grid: usize, include_endpoints: bool) -> f64 {
    if include_endpoints {
        k as f64 / (n_grid - 1) as f64
    } else {
        (k + 1) as f64 / (n_grid + 1) as f64
    }
}

/// `n_grid` points at `t = k / (n_grid - 1)`.
pub fn bridge_grid(a: &LatentVector, b: &LatentVector, n_grid: usize) -> Result<Vec<LatentVector>, BridgeError> {
    if n_grid < 2 {
        return Err(BridgeError::Config(format!("n_grid must be at least 2, got {n_grid}")));
    }
    (0..n_grid).map(|k| slerp(a, b, grid_t(k, n_grid, true))).collect()
}

/// Adds iid Normal(0, sigma^2) noise to every component; `sigma = 0` is an
/// exact copy. No clamping.
pub fn perturb<R: Rng + ?Sized>(v: &LatentVector, sigma: f64, rng: &mut R) -> Result<LatentVector, BridgeError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(BridgeError::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(v.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    Ok(LatentVector::new(v.components.iter().map(|x| x + normal.sample(rng)).collect()))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_4d1c_e4e5_b9e5);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-candidate stream seed: `sm(sm(sm(run_seed) ^ g) ^ p)` with `sm` the
/// SplitMix64 step. Independent of scheduling order.
pub fn mix(run_seed: u64, grid_index: u64, perturb_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(run_seed) ^ grid_index) ^ perturb_index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeConfig {
    pub n_grid: usize,
    pub n_perturb: usize,
    pub sigma: f64,
    pub seed: u64,
    pub include_endpoints: bool,
}

impl BridgeConfig {
    /// 100 grid points x 100 perturbations.
    pub fn coarse() -> BridgeConfig {
        BridgeConfig { n_grid: 100, n_perturb: 100, sigma: 0.0, seed: 0, include_endpoints: true }
    }

    /// 100 grid points x 5000 perturbations.
    pub fn production() -> BridgeConfig {
        BridgeConfig { n_perturb: 5000, ..BridgeConfig::coarse() }
    }

    pub fn total(&self) -> usize {
        self.n_grid * self.n_perturb
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        if self.n_grid < 2 {
            return Err(BridgeError::Config(format!("n_grid must be at least 2, got {}", self.n_grid)));
        }
        if self.n_perturb == 0 {
            return Err(BridgeError::Config("n_perturb must be positive".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(BridgeError::NegativeSigma(self.sigma));
        }
        Ok(())
    }
}

impl Default for BridgeConfig {
    fn default() -> Self {
        BridgeConfig::coarse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn v(x: &[f64]) -> LatentVector {
        LatentVector::new(x.to_vec())
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = v(&[1.0, 0.0, 0.0]);
        let b = v(&[0.0, 1.0, 0.0]);
        assert_eq!(slerp(&a, &b, 0.0).unwrap(), a);
        assert_eq!(slerp(&a, &b, 1.0).unwrap(), b);
        let mid = slerp(&a, &b, 0.5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mid.components[0] - h).abs() < 1e-12 && (mid.components[1] - h).abs() < 1e-12);
    }

    #[test]
    fn slerp_degenerate_inputs() {
        let a = v(&[0.3, -0.2]);
        assert_eq!(slerp(&a, &a, 0.37).unwrap(), a);
        assert!(matches!(slerp(&a, &v(&[-0.3, 0.2]), 0.5), Err(BridgeError::Antipodal)));
        assert!(matches!(slerp(&a, &v(&[0.0, 0.0]), 0.5), Err(BridgeError::ZeroVector)));
        assert!(matches!(slerp(&a, &v(&[1.0]), 0.5), Err(BridgeError::DimensionMismatch(2, 1))));
        assert!(slerp(&a, &v(&[0.1, 0.9]), 1.5).is_err());
    }

    #[test]
    fn grid_layout() {
        let a = v(&[1.0, 0.0]);
        let b = v(&[0.0, 1.0]);
        assert_eq!(bridge_grid(&a, &b, 2).unwrap(), vec![a.clone(), b.clone()]);
        let g = bridge_grid(&a, &b, 3).unwrap();
        assert!((g[1].components[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(bridge_grid(&a, &b, 100).unwrap().len(), 100);
        assert!(bridge_grid(&a, &b, 1).is_err());
    }

    #[test]
    fn perturb_identity_and_errors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = v(&[0.25, -1.5, 3.0]);
        assert_eq!(perturb(&x, 0.0, &mut rng).unwrap(), x);
        assert!(perturb(&x, -0.1, &mut rng).is_err());
        assert!(perturb(&x, f64::NAN, &mut rng).is_err());
        assert_ne!(perturb(&x, 0.1, &mut rng).unwrap(), x);
    }

    #[test]
    fn mix_separates_coordinates() {
        assert_ne!(mix(1, 0, 1), mix(1, 1, 0));
        assert_ne!(mix(1, 2, 3), mix(2, 2, 3));
        assert_eq!(mix(7, 8, 9), mix(7, 8, 9));
    }

    #[test]
    fn config_totals() {
        assert_eq!(BridgeConfig::coarse().total(), 10_000);
        assert_eq!(BridgeConfig::production().total(), 500_000);
        assert!(BridgeConfig { n_grid: 1, ..BridgeConfig::coarse() }.validate().is_err());
    }
}
