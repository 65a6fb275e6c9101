//! Random instances, Monte Carlo trials and phase-diagram sweeps.
//!
//! Every random stream is keyed by `(base_seed, trial_index, purpose)`, so a
//! trial can be regenerated alone and results do not depend on which worker
//! ran it.

mod monte_carlo;
mod phase;

pub use monte_carlo::{aggregate, run_monte_carlo, run_trial, run_trials, Aggregate, TrialSummary};
pub use phase::{sweep_phase_diagram, LambdaMode, PhaseRow};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::decoder::ProblemInstance;
use crate::error::{Error, Result};
use crate::replica::SystemParams;

pub const DEFAULT_SUCCESS_TOL: f64 = 1e-6;
/// Coordinates above this magnitude count as support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

/// Which random stream a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamTag {
    Matrix = 0,
    Signal = 1,
    Noise = 2,
}

/// Independent generator for one `(base_seed, trial_index, tag)` triple.
pub fn stream(base_seed: u64, trial_index: u64, tag: StreamTag) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial_index.to_le_bytes());
    seed[16] = tag as u8;
    ChaCha8Rng::from_seed(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Signal dimension.
    pub n: usize,
    pub params: SystemParams,
    pub trials: usize,
    pub base_seed: u64,
}

impl EnsembleSpec {
    /// Number of measurements, `round(alpha * n)`.
    pub fn m(&self) -> usize {
        (self.params.alpha * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n < 8 {
            return Err(Error::InvalidParams(format!("need n >= 8, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("need at least one trial".into()));
        }
        if self.m() == 0 {
            return Err(Error::InvalidParams(format!(
                "alpha * n rounds to zero measurements (alpha={}, n={})",
                self.params.alpha, self.n
            )));
        }
        Ok(())
    }
}

/// `n` IID draws from `(1 - rho) delta_0 + rho N(0, sigma2)`.
pub fn sample_mixture<R: Rng + ?Sized>(n: usize, rho: f64, sigma2: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParams(format!("mixture weight must lie in [0, 1], got {rho}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParams(format!("variance must be positive, got {sigma2}")));
    }
    let sd = sigma2.sqrt();
    Ok(DVector::from_fn(n, |_, _| {
        if rng.random::<f64>() < rho {
            sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    }))
}

/// Instance number `trial_index` of the ensemble.
pub fn sample_instance(spec: &EnsembleSpec, trial_index: u64) -> Result<ProblemInstance> {
    spec.validate()?;
    let (m, n) = (spec.m(), spec.n);
    let p = &spec.params;
    let mut rng_a = stream(spec.base_seed, trial_index, StreamTag::Matrix);
    let sd = (1.0 / n as f64).sqrt();
    // Column-major fill keeps each column a contiguous run of the stream.
    let a = DMatrix::from_iterator(m, n, (0..m * n).map(|_| sd * rng_a.sample::<f64, _>(StandardNormal)));
    let x0 = sample_mixture(n, p.rho_x, p.sigma2_x, &mut stream(spec.base_seed, trial_index, StreamTag::Signal))?;
    let w = sample_mixture(m, p.rho_w, p.sigma2_w, &mut stream(spec.base_seed, trial_index, StreamTag::Noise))?;
    ProblemInstance::from_ground_truth(a, x0, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> EnsembleSpec {
        EnsembleSpec {
            n,
            params: SystemParams::new(0.5, 1.0, 0.1, 0.1, 1.0, 1.0).unwrap(),
            trials: 1,
            base_seed: 7,
        }
    }

    #[test]
    fn zero_weight_gives_zeros() {
        let mut rng = stream(1, 0, StreamTag::Signal);
        let v = sample_mixture(1000, 0.0, 2.0, &mut rng).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn full_weight_variance() {
        let mut rng = stream(2, 0, StreamTag::Signal);
        let v = sample_mixture(1_000_000, 1.0, 2.5, &mut rng).unwrap();
        let mean = v.mean();
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((var / 2.5 - 1.0).abs() <= 0.01, "{var}");
    }

    #[test]
    fn nonzero_fraction() {
        let mut rng = stream(3, 0, StreamTag::Noise);
        let v = sample_mixture(1_000_000, 0.1, 1.0, &mut rng).unwrap();
        let frac = v.iter().filter(|&&x| x != 0.0).count() as f64 / v.len() as f64;
        assert!((frac - 0.1).abs() <= 0.002, "{frac}");
    }

    #[test]
    fn mixture_rejects_bad_weight() {
        let mut rng = stream(0, 0, StreamTag::Noise);
        assert!(sample_mixture(3, 1.5, 1.0, &mut rng).is_err());
        assert!(sample_mixture(3, -0.1, 1.0, &mut rng).is_err());
        assert!(sample_mixture(3, 0.5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn instances_are_reproducible() {
        let s = spec(64);
        let a = sample_instance(&s, 5).unwrap();
        let b = sample_instance(&s, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_instance(&s, 6).unwrap());
        assert_eq!(a.m(), 32);
        assert_eq!(a.n(), 64);
    }

    #[test]
    fn column_norms_match_ratio() {
        // Each squared column norm is a sum of M terms of variance 2/N^2, so
        // the average over N columns has sd sqrt(2 M) / N^(3/2).
        let s = spec(1024);
        let inst = sample_instance(&s, 0).unwrap();
        let n = inst.n() as f64;
        let avg = inst.a().column_iter().map(|c| c.norm_squared()).sum::<f64>() / n;
        let sd = (2.0 * inst.m() as f64).sqrt() / n.powf(1.5);
        assert!((avg - 0.5).abs() <= 5.0 * sd, "{avg}");
    }

    #[test]
    fn noiseless_when_rho_w_zero() {
        let mut s = spec(32);
        s.params.rho_w = 0.0;
        let inst = sample_instance(&s, 1).unwrap();
        assert!(inst.w().unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(inst.y(), &(inst.a() * inst.x0().unwrap()));
    }

    #[test]
    fn spec_validation() {
        assert!(spec(7).validate().is_err());
        let mut s = spec(16);
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = spec(16);
        s.params.alpha = 0.01;
        assert!(s.validate().is_err());
    }
}
