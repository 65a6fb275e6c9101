//! Damped Gauss-Seidel iteration of the mean-square-error equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::equations::{
    chi_hat_update, m_hat_update, mse_from_conjugates, overlap_m, self_overlap, susceptibility,
};
use super::{blend, rel_change, SolverConfig, SystemParams};

/// `m_hat` beyond which, together with [`PERFECT_MSE`], the iteration is
/// taken to be running off toward the zero-error solution.
pub const PERFECT_M_HAT: f64 = 1e12;
pub const PERFECT_MSE: f64 = 1e-24;

/// Number of times the step size is halved after a non-finite sweep.
const MAX_DAMPING_RETRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointState {
    pub mse: f64,
    pub chi: f64,
    pub m_hat: f64,
    pub chi_hat: f64,
    /// Overlap `m` between estimate and signal.
    pub diag_m: f64,
    /// Self-overlap `Q` of the estimate.
    pub diag_q: f64,
    /// Largest relative change of the undamped map at the last sweep.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FixedPointState {
    /// Standard starting point: `mse = rho_x sigma2_x`, `chi = m_hat = 1`, `chi_hat = alpha`.
    pub fn initial(p: &SystemParams) -> Self {
        let mut s = Self {
            mse: p.signal_power(),
            chi: 1.0,
            m_hat: 1.0,
            chi_hat: p.alpha,
            diag_m: 0.0,
            diag_q: 0.0,
            residual: f64::INFINITY,
            converged: false,
            iterations: 0,
        };
        s.refresh_diagnostics(p);
        s
    }

    fn refresh_diagnostics(&mut self, p: &SystemParams) {
        self.diag_m = overlap_m(p, self.m_hat, self.chi_hat);
        self.diag_q = self_overlap(p, self.m_hat, self.chi_hat);
    }

    /// `rho_x sigma2_x - 2 m + Q - mse`; zero up to rounding at any state
    /// produced by a sweep that has converged.
    pub fn diagnostic_gap(&self, p: &SystemParams) -> f64 {
        p.signal_power() - 2.0 * self.diag_m + self.diag_q - self.mse
    }

    fn is_finite(&self) -> bool {
        self.mse.is_finite() && self.chi.is_finite() && self.m_hat.is_finite() && self.chi_hat.is_finite()
    }

    fn shows_perfect_signature(&self) -> bool {
        self.m_hat > PERFECT_M_HAT && self.mse < PERFECT_MSE
    }
}

/// Result of [`solve_mse_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MseOutcome {
    /// A fixed point with positive error.
    Converged(FixedPointState),
    /// The iteration ran off with `m_hat -> inf`, `mse -> 0`: the
    /// perfect-reconstruction phase. Carries the state at detection.
    Perfect(FixedPointState),
}

impl MseOutcome {
    /// Predicted mean square error; zero in the perfect phase.
    pub fn mse(&self) -> f64 {
        match self {
            MseOutcome::Converged(s) => s.mse,
            MseOutcome::Perfect(_) => 0.0,
        }
    }

    pub fn state(&self) -> &FixedPointState {
        match self {
            MseOutcome::Converged(s) | MseOutcome::Perfect(s) => s,
        }
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self, MseOutcome::Perfect(_))
    }
}

/// One sweep over `mse -> chi -> m_hat -> chi_hat`, each update using the
/// freshest values and blended with the previous value by `damping`.
pub fn iterate_mse_step(
    p: &SystemParams,
    state: &FixedPointState,
    damping: f64,
) -> Result<FixedPointState> {
    if !(state.chi > 0.0 && state.m_hat > 0.0 && state.chi_hat > 0.0) {
        return Err(Error::InvalidParams(format!(
            "chi, m_hat, chi_hat must be positive, got ({}, {}, {})",
            state.chi, state.m_hat, state.chi_hat
        )));
    }
    let mse_raw = mse_from_conjugates(p, state.m_hat, state.chi_hat);
    let mse = blend(state.mse, mse_raw, damping);
    let chi_raw = susceptibility(p, state.m_hat, state.chi_hat);
    let chi = blend(state.chi, chi_raw, damping);
    let m_hat_raw = m_hat_update(p, mse, chi);
    let m_hat = blend(state.m_hat, m_hat_raw, damping);
    let chi_hat_raw = chi_hat_update(p, mse, chi);
    let chi_hat = blend(state.chi_hat, chi_hat_raw, damping);

    let residual = rel_change(mse_raw, state.mse)
        .max(rel_change(chi_raw, state.chi))
        .max(rel_change(m_hat_raw, state.m_hat))
        .max(rel_change(chi_hat_raw, state.chi_hat));

    let mut next = FixedPointState {
        mse,
        chi,
        m_hat,
        chi_hat,
        diag_m: 0.0,
        diag_q: 0.0,
        residual,
        converged: false,
        iterations: state.iterations + 1,
    };
    if !m_hat.is_finite() {
        return Err(Error::MseDivergence { last: Box::new(next) });
    }
    next.refresh_diagnostics(p);
    Ok(next)
}

/// Iterate from [`FixedPointState::initial`] until the relative change
/// falls below `cfg.rel_tol` or the perfect-phase signature appears.
pub fn solve_mse_fixed_point(p: &SystemParams, cfg: &SolverConfig) -> Result<MseOutcome> {
    p.validate()?;
    cfg.validate()?;
    let mut damping = cfg.damping;
    let mut retries = 0;
    let mut state = FixedPointState::initial(p);
    while state.iterations < cfg.max_iters {
        let next = match iterate_mse_step(p, &state, damping) {
            Ok(s) if s.is_finite() => Ok(s),
            Ok(s) => Err(s),
            Err(Error::MseDivergence { last }) => Err(*last),
            Err(e) => return Err(e),
        };
        let next = match next {
            Ok(s) => s,
            Err(bad) => {
                if retries == MAX_DAMPING_RETRIES {
                    return Err(Error::MseDivergence { last: Box::new(bad) });
                }
                retries += 1;
                damping = 1.0 - 0.5 * (1.0 - damping);
                continue;
            }
        };
        state = next;
        if state.shows_perfect_signature() {
            return Ok(MseOutcome::Perfect(state));
        }
        if state.residual <= cfg.rel_tol {
            state.converged = true;
            return Ok(MseOutcome::Converged(state));
        }
    }
    Err(Error::MseNoConvergence { last: Box::new(state) })
}
