//! Choice of the regularization weight.
//!
//! The objective is scanned on a coarse log-spaced grid (always including
//! `lambda = 1`), and the best scan point's neighbourhood is then refined
//! by golden-section search in `ln(lambda)`. The scan guards against the
//! flat regions where no phase boundary exists at all.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::boundary::{find_critical_alpha, find_critical_rho_x, ALPHA_BRACKET, RHO_X_BRACKET};
use super::mse::solve_mse_fixed_point;
use super::{SolverConfig, SystemParams};

/// What "best lambda" means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaObjective {
    /// Maximize the critical signal density at fixed `alpha`, `rho_w`.
    CriticalRhoX { alpha: f64, rho_w: f64 },
    /// Minimize the critical compression ratio at fixed `rho_x`, `rho_w`.
    CriticalAlpha { rho_x: f64, rho_w: f64 },
    /// Minimize the predicted mse. The `lambda` field of `params` is ignored.
    Mse { params: SystemParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaOptimum {
    pub lambda: f64,
    /// Objective in natural units (critical density, critical ratio or mse).
    pub value: f64,
    pub evaluations: usize,
}

impl LambdaObjective {
    /// Natural-unit value at `lambda`. Missing phase boundaries map to the
    /// edge of the search bracket they fall off (or `+inf` for a critical
    /// ratio above one).
    pub fn value(&self, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
        match *self {
            LambdaObjective::CriticalRhoX { alpha, rho_w } => {
                match find_critical_rho_x(alpha, lambda, rho_w, cfg) {
                    Err(Error::NoPhaseBoundary { residual_sign, .. }) => Ok(if residual_sign > 0.0 {
                        RHO_X_BRACKET.1
                    } else {
                        0.0
                    }),
                    other => other,
                }
            }
            LambdaObjective::CriticalAlpha { rho_x, rho_w } => {
                match find_critical_alpha(lambda, rho_x, rho_w, cfg) {
                    Err(Error::NoPhaseBoundary { residual_sign, .. }) => Ok(if residual_sign > 0.0 {
                        ALPHA_BRACKET.0
                    } else {
                        f64::INFINITY
                    }),
                    other => other,
                }
            }
            LambdaObjective::Mse { params } => {
                let p = SystemParams { lambda, ..params };
                Ok(solve_mse_fixed_point(&p, cfg)?.mse())
            }
        }
    }

    /// Larger is better.
    fn score(&self, value: f64) -> f64 {
        match self {
            LambdaObjective::CriticalRhoX { .. } => value,
            LambdaObjective::CriticalAlpha { .. } | LambdaObjective::Mse { .. } => -value,
        }
    }
}

/// Golden-section search on `ln(lambda)` over `cfg.lambda_bracket`.
///
/// The returned optimum never scores worse than `lambda = 1` when that
/// lies in the bracket.
pub fn optimize_lambda(objective: &LambdaObjective, cfg: &SolverConfig) -> Result<LambdaOptimum> {
    cfg.validate()?;
    let mut evaluations = 0;
    let mut eval = |log_lambda: f64| -> Result<f64> {
        evaluations += 1;
        let lambda = log_lambda.exp();
        objective
            .value(lambda, cfg)
            .map(|v| objective.score(v))
            .map_err(|e| Error::Probe {
                lambda,
                source: Box::new(e),
            })
    };

    let (lo, hi) = (cfg.lambda_bracket.0.ln(), cfg.lambda_bracket.1.ln());
    let n = cfg.lambda_scan_points;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    if lo < 0.0 && hi > 0.0 && !grid.contains(&0.0) {
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &g in &grid {
        scores.push(eval(g)?);
    }
    let best = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    if scores[best] == f64::NEG_INFINITY {
        return Err(Error::NoPhaseBoundary {
            lo: cfg.lambda_bracket.0,
            hi: cfg.lambda_bracket.1,
            residual_sign: -1.0,
        });
    }

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > cfg.golden_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let (mut x_best, mut s_best) = if fc >= fd { (c, fc) } else { (d, fd) };
    if scores[best] > s_best {
        x_best = grid[best];
        s_best = scores[best];
    }
    let value = match objective {
        LambdaObjective::CriticalRhoX { .. } => s_best,
        _ => -s_best,
    };
    Ok(LambdaOptimum {
        lambda: x_best.exp(),
        value,
        evaluations,
    })
}
