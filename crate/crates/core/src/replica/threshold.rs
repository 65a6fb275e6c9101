//! Zero-error limit of the replica equations.
//!
//! Alternates the updates for the rescaled variance `A` and the conjugate
//! susceptibility until they settle, then evaluates the success residual.
//! None of this depends on the signal or noise variances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::equations::{success_residual, threshold_chi_hat, threshold_variance};
use super::{blend, rel_change, SolverConfig, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    /// Rescaled variance `A`.
    pub a: f64,
    pub chi_hat: f64,
    /// Positive inside the perfect-reconstruction phase.
    pub condition_residual: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn solve_threshold_fixed_point(p: &ThresholdParams, cfg: &SolverConfig) -> Result<ThresholdState> {
    p.validate()?;
    cfg.validate()?;
    let d = cfg.damping;
    let mut a = 1.0;
    let mut chi_hat = p.alpha;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        let a_raw = threshold_variance(p, chi_hat);
        let a_next = blend(a, a_raw, d);
        let chi_hat_raw = threshold_chi_hat(p, a_next);
        let chi_hat_next = blend(chi_hat, chi_hat_raw, d);
        residual = rel_change(a_raw, a).max(rel_change(chi_hat_raw, chi_hat));
        a = a_next;
        chi_hat = chi_hat_next;
        if !(a > 0.0 && a.is_finite() && chi_hat > 0.0 && chi_hat.is_finite()) {
            break;
        }
        if residual <= cfg.rel_tol {
            return Ok(ThresholdState {
                a,
                chi_hat,
                condition_residual: success_residual(p, a, chi_hat),
                residual,
                converged: true,
                iterations: it,
            });
        }
    }
    Err(Error::ThresholdNoConvergence {
        last: Box::new(ThresholdState {
            a,
            chi_hat,
            condition_residual: success_residual(p, a, chi_hat),
            residual,
            converged: false,
            iterations: cfg.max_iters,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(rho_x: f64) -> ThresholdParams {
        ThresholdParams {
            alpha: 0.5,
            lambda: 1.0,
            rho_x,
            rho_w: 0.1,
        }
    }

    #[test]
    fn residual_vanishes_at_reported_threshold() {
        let s = solve_threshold_fixed_point(&tp(0.0770), &SolverConfig::default()).unwrap();
        assert!(s.converged);
        assert!(s.condition_residual.abs() <= 1e-3, "{}", s.condition_residual);
        assert!(s.a > 0.0 && s.chi_hat > 0.0);
    }

    #[test]
    fn damping_does_not_move_fixed_point() {
        let base = SolverConfig::default();
        let s3 = solve_threshold_fixed_point(&tp(0.0770), &SolverConfig { damping: 0.3, ..base }).unwrap();
        let s7 = solve_threshold_fixed_point(&tp(0.0770), &SolverConfig { damping: 0.7, ..base }).unwrap();
        assert!(rel_change(s3.a, s7.a) <= 1e-9);
        assert!(rel_change(s3.chi_hat, s7.chi_hat) <= 1e-9);
    }

    #[test]
    fn converged_state_is_stationary() {
        let p = tp(0.12);
        let cfg = SolverConfig::default();
        let s = solve_threshold_fixed_point(&p, &cfg).unwrap();
        let a_again = threshold_variance(&p, s.chi_hat);
        let chi_again = threshold_chi_hat(&p, s.a);
        assert!(rel_change(a_again, s.a) <= 10.0 * cfg.rel_tol);
        assert!(rel_change(chi_again, s.chi_hat) <= 10.0 * cfg.rel_tol);
    }

    #[test]
    fn residual_sign_separates_phases() {
        let cfg = SolverConfig::default();
        assert!(solve_threshold_fixed_point(&tp(0.05), &cfg).unwrap().condition_residual > 0.0);
        assert!(solve_threshold_fixed_point(&tp(0.15), &cfg).unwrap().condition_residual < 0.0);
    }

    #[test]
    fn degenerate_densities() {
        let cfg = SolverConfig::default();
        for &(rx, rw) in &[(0.0, 0.1), (1.0, 0.1), (0.1, 1.0), (0.1, 0.0)] {
            let p = ThresholdParams {
                alpha: 0.5,
                lambda: 1.0,
                rho_x: rx,
                rho_w: rw,
            };
            let s = solve_threshold_fixed_point(&p, &cfg).unwrap();
            assert!(s.condition_residual.is_finite());
        }
    }

    #[test]
    fn reports_non_convergence_with_last_state() {
        let cfg = SolverConfig {
            max_iters: 2,
            ..SolverConfig::default()
        };
        match solve_threshold_fixed_point(&tp(0.1), &cfg) {
            Err(Error::ThresholdNoConvergence { last }) => {
                assert!(!last.converged);
                assert!(last.a > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
