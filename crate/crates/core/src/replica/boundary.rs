//! Phase boundaries by bisection on the sign of the success residual.

use crate::error::{Error, Result};

use super::threshold::solve_threshold_fixed_point;
use super::{SolverConfig, ThresholdParams};

pub const RHO_X_BRACKET: (f64, f64) = (1e-6, 1.0 - 1e-6);
pub const ALPHA_BRACKET: (f64, f64) = (1e-4, 1.0);

fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() || f_lo == 0.0 || f_hi == 0.0 {
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        return Err(Error::NoPhaseBoundary {
            lo,
            hi,
            residual_sign: f_lo.signum(),
        });
    }
    let (mut a, mut b) = (lo, hi);
    let lo_positive = f_lo > 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v > 0.0) == lo_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Largest signal density that still admits perfect recovery at the given
/// compression ratio, regularization and noise density.
pub fn find_critical_rho_x(alpha: f64, lambda: f64, rho_w: f64, cfg: &SolverConfig) -> Result<f64> {
    let base = ThresholdParams {
        alpha,
        lambda,
        rho_x: 0.5,
        rho_w,
    };
    base.validate()?;
    if !(alpha <= 1.0) || !(rho_w < 1.0) {
        return Err(Error::InvalidParams(format!(
            "need alpha in (0, 1] and rho_w in [0, 1), got alpha={alpha}, rho_w={rho_w}"
        )));
    }
    let (lo, hi) = RHO_X_BRACKET;
    bisect(
        |rho_x| {
            let p = ThresholdParams { rho_x, ..base };
            Ok(solve_threshold_fixed_point(&p, cfg)?.condition_residual)
        },
        lo,
        hi,
        cfg.bisection_tol,
    )
}

/// Smallest compression ratio above which recovery is perfect.
pub fn find_critical_alpha(lambda: f64, rho_x: f64, rho_w: f64, cfg: &SolverConfig) -> Result<f64> {
    let base = ThresholdParams {
        alpha: 1.0,
        lambda,
        rho_x,
        rho_w,
    };
    base.validate()?;
    let (lo, hi) = ALPHA_BRACKET;
    bisect(
        |alpha| {
            let p = ThresholdParams { alpha, ..base };
            Ok(solve_threshold_fixed_point(&p, cfg)?.condition_residual)
        },
        lo,
        hi,
        cfg.bisection_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_simple_root() {
        let r = bisect(|x| Ok(0.3 - x), 0.0, 1.0, 1e-10).unwrap();
        assert!((r - 0.3).abs() < 1e-10);
        let r = bisect(|x| Ok(x - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((r - 0.3).abs() < 1e-10);
    }

    #[test]
    fn bisect_rejects_no_sign_change() {
        let err = bisect(|x| Ok(x + 1.0), 0.0, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::NoPhaseBoundary { residual_sign, .. } if residual_sign > 0.0));
    }

    #[test]
    fn critical_rho_x_at_unit_lambda() {
        let rc = find_critical_rho_x(0.5, 1.0, 0.1, &SolverConfig::default()).unwrap();
        assert!((rc - 0.0770).abs() <= 5e-4, "{rc}");
    }

    #[test]
    fn critical_alpha_inverts_critical_rho_x() {
        let cfg = SolverConfig::default();
        let ac = find_critical_alpha(1.0, 0.0770, 0.1, &cfg).unwrap();
        assert!((ac - 0.5).abs() <= 5e-3, "{ac}");
        let rc = find_critical_rho_x(ac, 1.0, 0.1, &cfg).unwrap();
        assert!((rc - 0.0770).abs() < 1e-5);
    }

    #[test]
    fn critical_alpha_rises_with_density() {
        let cfg = SolverConfig::default();
        let mut prev = 0.0;
        for k in 1..=8 {
            let rho_x = 0.02 * k as f64;
            let ac = find_critical_alpha(1.0, rho_x, rho_x / 10.0, &cfg).unwrap();
            assert!(ac >= prev, "alpha_c({rho_x}) = {ac} < {prev}");
            prev = ac;
        }
    }

    #[test]
    fn no_boundary_reported() {
        // Even alpha = 1 cannot handle this much noise.
        let err = find_critical_alpha(1.0, 0.5, 0.5, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoPhaseBoundary { .. }));
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = SolverConfig::default();
        assert!(find_critical_rho_x(1.5, 1.0, 0.1, &cfg).is_err());
        assert!(find_critical_rho_x(0.5, 1.0, 1.0, &cfg).is_err());
        assert!(find_critical_alpha(-1.0, 0.1, 0.1, &cfg).is_err());
    }
}
