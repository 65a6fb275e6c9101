//! Convex decoder for `min_x ||y - A x||_1 + lambda ||x||_1`.
//!
//! The solver is a first-order primal-dual splitting with adaptive restarts
//! ([`primal_dual`]); once its duality gap is small, an active-set polish
//! solves the small linear systems that pin down the exact vertex and a
//! subgradient certificate is checked at the returned point.

pub mod opnorm;
pub mod oracle;
pub mod primal_dual;

pub use opnorm::estimate_operator_norm;
pub use primal_dual::{certificate, decode};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One concrete measurement problem, optionally with the ground truth that
/// generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: DMatrix<f64>,
    y: DVector<f64>,
    x0: Option<DVector<f64>>,
    w: Option<DVector<f64>>,
}

impl ProblemInstance {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::Dimension("A must be at least 1x1".into()));
        }
        if y.len() != a.nrows() {
            return Err(Error::Dimension(format!(
                "y has length {} but A has {} rows",
                y.len(),
                a.nrows()
            )));
        }
        Ok(Self { a, y, x0: None, w: None })
    }

    /// Builds `y = A x0 + w`.
    pub fn from_ground_truth(a: DMatrix<f64>, x0: DVector<f64>, w: DVector<f64>) -> Result<Self> {
        if x0.len() != a.ncols() || w.len() != a.nrows() {
            return Err(Error::Dimension(format!(
                "A is {}x{}, x0 has length {}, w has length {}",
                a.nrows(),
                a.ncols(),
                x0.len(),
                w.len()
            )));
        }
        let y = &a * &x0 + &w;
        let mut inst = Self::new(a, y)?;
        inst.x0 = Some(x0);
        inst.w = Some(w);
        Ok(inst)
    }

    /// Like [`from_ground_truth`](Self::from_ground_truth) but with a
    /// stored `y` that must equal `A x0 + w` exactly.
    pub fn from_parts(
        a: DMatrix<f64>,
        y: DVector<f64>,
        x0: Option<DVector<f64>>,
        w: Option<DVector<f64>>,
    ) -> Result<Self> {
        match (x0, w) {
            (None, None) => Self::new(a, y),
            (Some(x0), Some(w)) => {
                let inst = Self::from_ground_truth(a, x0, w)?;
                if inst.y != y {
                    return Err(Error::Dimension("stored y differs from A x0 + w".into()));
                }
                Ok(inst)
            }
            _ => Err(Error::Dimension("x0 and w must be given together".into())),
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }
    pub fn x0(&self) -> Option<&DVector<f64>> {
        self.x0.as_ref()
    }
    pub fn w(&self) -> Option<&DVector<f64>> {
        self.w.as_ref()
    }
    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }
    /// Signal dimension.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Primal and dual step are `step_scale / ||A||`; must be in (0, 1).
    pub step_scale: f64,
    /// Subgradient certificate tolerance, relative to `1 + ||A^T sign(y)||_inf`.
    pub primal_tol: f64,
    /// Duality gap tolerance, relative to `1 + objective`.
    pub dual_tol: f64,
    pub max_iters: usize,
    pub power_iters: usize,
    pub power_tol: f64,
    /// Iterations between restart / stopping checks.
    pub check_interval: usize,
    /// Restart once the gap has shrunk by this factor since the last restart.
    pub restart_factor: f64,
    /// Entries with magnitude at most `zero_tol * scale` count as zero in
    /// the certificate.
    pub zero_tol: f64,
    /// Solve for the exact vertex once the gap is small.
    pub polish: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            step_scale: 0.99,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            max_iters: 100_000,
            power_iters: 200,
            power_tol: 1e-12,
            check_interval: 64,
            restart_factor: 0.2,
            zero_tol: 1e-9,
            polish: true,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return Err(Error::InvalidParams(format!(
                "step_scale must lie in (0, 1), got {}",
                self.step_scale
            )));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0 && self.power_tol > 0.0 && self.zero_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if self.check_interval == 0 || self.power_iters == 0 {
            return Err(Error::InvalidParams("iteration counts must be positive".into()));
        }
        if !(self.restart_factor > 0.0 && self.restart_factor < 1.0) {
            return Err(Error::InvalidParams("restart_factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub x_hat: DVector<f64>,
    /// `||y - A x_hat||_1 + lambda ||x_hat||_1`
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Primal objective minus the best feasible dual objective.
    pub gap: f64,
    /// `||A^T u - lambda v||_inf` for the best subgradient selections found.
    pub certificate: f64,
    /// Fixed-point residuals of the last primal-dual step.
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Best objective seen at each check, starting from `||y||_1`.
    pub objective_trace: Vec<f64>,
    pub polished: bool,
}

/// `||y - A x||_1 + lambda ||x||_1`.
pub fn evaluate_objective(instance: &ProblemInstance, x: &DVector<f64>, lambda: f64) -> Result<f64> {
    if x.len() != instance.n() {
        return Err(Error::Dimension(format!(
            "x has length {} but the instance has {} unknowns",
            x.len(),
            instance.n()
        )));
    }
    Ok(objective_unchecked(instance, x, lambda))
}

pub(crate) fn objective_unchecked(instance: &ProblemInstance, x: &DVector<f64>, lambda: f64) -> f64 {
    let r = instance.y() - instance.a() * x;
    r.lp_norm(1) + lambda * x.lp_norm(1)
}
