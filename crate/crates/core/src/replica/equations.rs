//! Right-hand sides of the replica-symmetric saddle-point equations.
//!
//! Mixture terms whose weight is exactly zero are skipped rather than
//! multiplied by zero, so degenerate densities never evaluate `0 * inf`.

use crate::special_fns::{one_minus_two_q, q_function, r_unchecked, s_unchecked};

use super::{SystemParams, ThresholdParams};

#[inline]
fn weighted<F: FnOnce() -> f64>(weight: f64, term: F) -> f64 {
    if weight == 0.0 {
        0.0
    } else {
        weight * term()
    }
}

/// Effective variance seen by a nonzero signal coordinate, `chi_hat + sigma2_x m_hat^2`.
#[inline]
pub fn active_variance(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    chi_hat + p.sigma2_x * m_hat * m_hat
}

/// Mean square error as a function of the conjugate parameters.
///
/// Evaluated as `m_hat^-2 [(1 - rho_x) E soft(sqrt(chi_hat) z)^2 + rho_x (...)]`,
/// which is algebraically the same as
/// `rho_x s2 - 4 s2 rho_x Q(a) - 2 m_hat^-2 [(1-rho_x) r(chi_hat) + rho_x r(H)]`
/// (see [`mse_direct`]) but does not lose the `O(m_hat^-2)` result to
/// cancellation of `O(m_hat^-1)` terms as `m_hat` grows.
pub fn mse_from_conjugates(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    let lam = p.lambda;
    let inactive = weighted(1.0 - p.rho_x, || -2.0 * r_unchecked(lam, chi_hat));
    let active = weighted(p.rho_x, || {
        let a = lam / active_variance(p, m_hat, chi_hat).sqrt();
        let qa = q_function(a);
        lam * lam * (s_unchecked(a) + 2.0 * qa) + chi_hat * (4.0 * qa - 1.0)
    });
    (inactive + active) / (m_hat * m_hat)
}

/// The textbook form of [`mse_from_conjugates`]. Kept as a cross-check.
pub fn mse_direct(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    let h = active_variance(p, m_hat, chi_hat);
    let lam = p.lambda;
    p.signal_power()
        - 4.0 * p.sigma2_x * p.rho_x * q_function(lam / h.sqrt())
        - 2.0 / (m_hat * m_hat)
            * ((1.0 - p.rho_x) * r_unchecked(lam, chi_hat) + p.rho_x * r_unchecked(lam, h))
}

/// Susceptibility `chi`.
pub fn susceptibility(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    let lam = p.lambda;
    let h = active_variance(p, m_hat, chi_hat);
    2.0 / m_hat
        * (weighted(1.0 - p.rho_x, || q_function(lam / chi_hat.sqrt()))
            + weighted(p.rho_x, || q_function(lam / h.sqrt())))
}

/// Conjugate overlap `m_hat` (equal to `Q_hat` at the saddle point).
pub fn m_hat_update(p: &SystemParams, mse: f64, chi: f64) -> f64 {
    let clean = weighted(1.0 - p.rho_w, || one_minus_two_q(chi / mse.sqrt()));
    let noisy = weighted(p.rho_w, || one_minus_two_q(chi / (mse + p.sigma2_w).sqrt()));
    p.alpha * (clean + noisy) / chi
}

/// Conjugate susceptibility `chi_hat`.
pub fn chi_hat_update(p: &SystemParams, mse: f64, chi: f64) -> f64 {
    let g = |x: f64| s_unchecked(x) + 2.0 * q_function(x);
    let clean = weighted(1.0 - p.rho_w, || g(chi / mse.sqrt()));
    let noisy = weighted(p.rho_w, || g(chi / (mse + p.sigma2_w).sqrt()));
    p.alpha * (clean + noisy)
}

/// Overlap `m = E[x0 x_hat]` per component, with `Q_hat = m_hat`.
pub fn overlap_m(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    let h = active_variance(p, m_hat, chi_hat);
    2.0 * p.sigma2_x * p.rho_x * q_function(p.lambda / h.sqrt())
}

/// Self-overlap `Q = E[x_hat^2]` per component, with `Q_hat = m_hat`.
pub fn self_overlap(p: &SystemParams, m_hat: f64, chi_hat: f64) -> f64 {
    let h = active_variance(p, m_hat, chi_hat);
    let lam = p.lambda;
    -2.0 / (m_hat * m_hat)
        * (weighted(1.0 - p.rho_x, || r_unchecked(lam, chi_hat))
            + weighted(p.rho_x, || r_unchecked(lam, h)))
}

/// Denominator term `2 (1 - rho_x) Q(lambda / sqrt(chi_hat)) + rho_x`:
/// the asymptotic fraction of coordinates outside the dead zone.
pub fn active_fraction(p: &ThresholdParams, chi_hat: f64) -> f64 {
    weighted(1.0 - p.rho_x, || 2.0 * q_function(p.lambda / chi_hat.sqrt())) + p.rho_x
}

/// Rescaled variance `A` of the zero-error limit.
pub fn threshold_variance(p: &ThresholdParams, chi_hat: f64) -> f64 {
    let lam = p.lambda;
    let num = weighted(p.rho_x, || lam * lam + chi_hat)
        - weighted(1.0 - p.rho_x, || 2.0 * r_unchecked(lam, chi_hat));
    let den = active_fraction(p, chi_hat);
    num / (den * den)
}

/// Conjugate susceptibility of the zero-error limit.
pub fn threshold_chi_hat(p: &ThresholdParams, a: f64) -> f64 {
    let x = 1.0 / a.sqrt();
    p.alpha * (weighted(1.0 - p.rho_w, || s_unchecked(x) + 2.0 * q_function(x)) + p.rho_w)
}

/// `alpha (1 - rho_w) [1 - 2Q(1/sqrt(A))] - [2 (1 - rho_x) Q(lambda/sqrt(chi_hat)) + rho_x]`.
///
/// Positive inside the perfect-reconstruction phase.
pub fn success_residual(p: &ThresholdParams, a: f64, chi_hat: f64) -> f64 {
    p.alpha * weighted(1.0 - p.rho_w, || one_minus_two_q(1.0 / a.sqrt())) - active_fraction(p, chi_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::s_func;

    fn params() -> SystemParams {
        SystemParams::new(0.5, 1.0, 0.15, 0.1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn stable_mse_matches_direct_form() {
        let p = params();
        for &(mh, ch) in &[(0.5, 0.3), (1.6, 0.38), (3.0, 1.2), (10.0, 0.05), (0.1, 4.0)] {
            let a = mse_from_conjugates(&p, mh, ch);
            let b = mse_direct(&p, mh, ch);
            assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "m_hat={mh}: {a} vs {b}");
        }
    }

    #[test]
    fn stable_mse_survives_large_m_hat() {
        let p = params();
        let mh = 1e10;
        let v = mse_from_conjugates(&p, mh, 0.38);
        assert!(v > 0.0 && v < 1e-19);
        // direct form is dominated by rounding noise here
        assert!((mse_direct(&p, mh, 0.38) - v).abs() > 10.0 * v);
    }

    #[test]
    fn diag_identity_is_algebraic() {
        let p = SystemParams::new(0.6, 0.7, 0.2, 0.05, 2.0, 0.5).unwrap();
        for &(mh, ch) in &[(0.8, 0.3), (2.0, 1.0), (5.0, 0.2)] {
            let m = overlap_m(&p, mh, ch);
            let q = self_overlap(&p, mh, ch);
            let mse = mse_from_conjugates(&p, mh, ch);
            assert!((p.signal_power() - 2.0 * m + q - mse).abs() < 1e-13);
        }
    }

    #[test]
    fn threshold_chi_hat_matches_written_form() {
        let p = ThresholdParams {
            alpha: 0.5,
            lambda: 1.0,
            rho_x: 0.08,
            rho_w: 0.1,
        };
        for &a in &[0.2, 1.0, 3.9, 40.0] {
            let x = 1.0 / f64::sqrt(a);
            let written = p.alpha
                * (1.0 - p.rho_w)
                * (a * (1.0 - 2.0 * q_function(x))
                    - (2.0 * a / std::f64::consts::PI).sqrt() * (-1.0 / (2.0 * a)).exp()
                    + 2.0 * q_function(x))
                + p.alpha * p.rho_w;
            assert!((threshold_chi_hat(&p, a) - written).abs() < 1e-14);
            assert!((s_func(x).unwrap() - s_unchecked(x)).abs() == 0.0);
        }
    }

    #[test]
    fn degenerate_weights_are_finite() {
        let p = SystemParams::new(0.5, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(mse_from_conjugates(&p, 1.0, 0.5).is_finite());
        assert!(m_hat_update(&p, 0.0, 0.5).is_finite());
        assert!(chi_hat_update(&p, 0.0, 0.5).is_finite());
        let t = p.threshold_params();
        assert!(success_residual(&t, 1.0, 0.5).is_finite());
    }
}
