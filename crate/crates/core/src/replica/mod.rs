//! Replica-symmetric predictions for l1-l1 recovery.
//!
//! Two coupled fixed-point systems are solved here. The four-variable
//! system in [`mse`] gives the mean square error of the estimate when
//! recovery is imperfect. The two-variable system in [`threshold`] is its
//! zero-error limit; the sign of its success residual tells which phase a
//! parameter point is in, and [`boundary`] bisects on that sign.
//! [`optimize`] tunes the regularization weight on top of either.

pub mod boundary;
pub mod equations;
pub mod mse;
pub mod optimize;
pub mod threshold;

pub use boundary::{find_critical_alpha, find_critical_rho_x};
pub use mse::{iterate_mse_step, solve_mse_fixed_point, FixedPointState, MseOutcome};
pub use optimize::{optimize_lambda, LambdaObjective, LambdaOptimum};
pub use threshold::{solve_threshold_fixed_point, ThresholdState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One problem ensemble: compression ratio, regularization weight and the
/// two Bernoulli-Gaussian mixtures for signal and noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Measurements per unknown, `M / N`.
    pub alpha: f64,
    pub lambda: f64,
    /// Fraction of nonzero signal entries.
    pub rho_x: f64,
    /// Fraction of nonzero noise entries.
    pub rho_w: f64,
    /// Variance of the nonzero signal entries.
    pub sigma2_x: f64,
    /// Variance of the nonzero noise entries.
    pub sigma2_w: f64,
}

impl SystemParams {
    pub fn new(
        alpha: f64,
        lambda: f64,
        rho_x: f64,
        rho_w: f64,
        sigma2_x: f64,
        sigma2_w: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            lambda,
            rho_x,
            rho_w,
            sigma2_x,
            sigma2_w,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.threshold_params().validate()?;
        for (name, v) in [("sigma2_x", self.sigma2_x), ("sigma2_w", self.sigma2_w)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Per-component signal power `rho_x * sigma2_x`.
    pub fn signal_power(&self) -> f64 {
        self.rho_x * self.sigma2_x
    }

    /// The variance-free part that determines the phase boundary.
    pub fn threshold_params(&self) -> ThresholdParams {
        ThresholdParams {
            alpha: self.alpha,
            lambda: self.lambda,
            rho_x: self.rho_x,
            rho_w: self.rho_w,
        }
    }
}

/// [`SystemParams`] without the variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub alpha: f64,
    pub lambda: f64,
    pub rho_x: f64,
    pub rho_w: f64,
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and positive, got {}",
                self.alpha
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and positive, got {}",
                self.lambda
            )));
        }
        for (name, v) in [("rho_x", self.rho_x), ("rho_w", self.rho_w)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight on the previous iterate, `0 <= damping < 1`.
    pub damping: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub lambda_bracket: (f64, f64),
    pub bisection_tol: f64,
    /// Log-spaced probes used to bracket the optimum before golden-section refinement.
    pub lambda_scan_points: usize,
    /// Golden-section stopping width in `ln(lambda)`.
    pub golden_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            rel_tol: 1e-12,
            max_iters: 200_000,
            lambda_bracket: (1e-3, 1e3),
            bisection_tol: 1e-6,
            lambda_scan_points: 25,
            golden_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParams(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if !(self.rel_tol > 0.0 && self.bisection_tol > 0.0 && self.golden_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        let (lo, hi) = self.lambda_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        if self.lambda_scan_points < 3 {
            return Err(Error::InvalidParams("lambda_scan_points must be at least 3".into()));
        }
        Ok(())
    }
}

/// Largest relative change between two iterates of one variable.
pub(crate) fn rel_change(new: f64, old: f64) -> f64 {
    let scale = old.abs().max(new.abs()).max(f64::MIN_POSITIVE);
    (new - old).abs() / scale
}

pub(crate) fn blend(old: f64, raw: f64, damping: f64) -> f64 {
    damping * old + (1.0 - damping) * raw
}
