//! Scalar special functions for the replica equations.
//!
//! Everything here is a closed form evaluated in double precision. The
//! Gaussian tail `Q(x) = P(Z > x)` is built on the complementary error
//! function with a separate continued-fraction branch for large arguments,
//! where `erfc(x / sqrt(2))` would inherit the rounding error of the scaled
//! argument.
//!
//! The quadrature-based reference implementations used to validate these
//! functions live in [`oracle`]. Nothing in the solver paths calls them.

pub mod oracle;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this argument `q_function` switches to the continued fraction.
const TAIL_SWITCH: f64 = 6.0;

/// Below this argument `s_func` is evaluated by its power series.
const S_SERIES_SWITCH: f64 = 1.0;

/// Above this value of `lambda / sqrt(h)` `r_lambda` uses its asymptotic
/// expansion; the closed form loses about `t^4` in relative accuracy.
const R_ASYMPTOTIC_SWITCH: f64 = 8.0;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * exp_neg_half_square(x)
}

/// `exp(-x^2 / 2)` with the square split into an exact head and tail.
#[inline]
fn exp_neg_half_square(x: f64) -> f64 {
    let head = x * x;
    let tail = x.mul_add(x, -head);
    (-0.5 * head).exp() * (-0.5 * tail).exp()
}

/// Mills ratio `Q(x) / pdf(x)` by the modified Lentz algorithm on
/// `1 / (x + 1 / (x + 2 / (x + 3 / (x + ...))))`. Only used for `x > 6`.
fn mills_ratio_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    1.0 / f
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
///
/// Relative error stays at the 1e-14 level on `|x| <= 37`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x > TAIL_SWITCH {
        normal_pdf(x) * mills_ratio_cf(x)
    } else if x < -TAIL_SWITCH {
        1.0 - normal_pdf(-x) * mills_ratio_cf(-x)
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// `1 - 2 Q(x)`, i.e. `P(|Z| < x)` for `x >= 0`, without the cancellation
/// of the direct difference near zero.
pub fn one_minus_two_q(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        1.0 - 2.0 * q_function(x)
    } else {
        libm::erf(x * FRAC_1_SQRT_2)
    }
}

/// `s(x) = x^-2 [1 - 2Q(x)] - sqrt(2 / (pi x^2)) exp(-x^2 / 2)`.
///
/// Equivalently `x^-2 * E[t^2 1{|t| < x}]` for standard normal `t`.
pub fn s_func(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            func: "s_func",
            detail: format!("argument must be positive, got {x}"),
        });
    }
    Ok(s_unchecked(x))
}

pub(crate) fn s_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < S_SERIES_SWITCH {
        s_series(x)
    } else if x.is_infinite() {
        0.0
    } else {
        one_minus_two_q(x) / (x * x) - (2.0 / (PI * x * x)).sqrt() * exp_neg_half_square(x)
    }
}

/// `sqrt(2/pi) * sum_k (-1/2)^k x^(2k+1) / (k! (2k+3))`
fn s_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x; // (-1/2)^k x^(2k+1) / k!
    let mut sum = 0.0;
    for k in 0..60 {
        let term = power / (2 * k + 3) as f64;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        power *= -0.5 * x2 / (k + 1) as f64;
    }
    (2.0 / PI).sqrt() * sum
}

/// `r_lambda(h) = lambda sqrt(h / 2pi) exp(-lambda^2 / 2h) - (lambda^2 + h) Q(lambda / sqrt(h))`.
///
/// Always nonpositive: it is `-(h/2) E[(|Z| - lambda/sqrt(h))_+^2]`.
pub fn r_lambda(lambda: f64, h: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(h > 0.0) {
        return Err(Error::Domain {
            func: "r_lambda",
            detail: format!("lambda and h must be positive, got lambda={lambda}, h={h}"),
        });
    }
    Ok(r_unchecked(lambda, h))
}

pub(crate) fn r_unchecked(lambda: f64, h: f64) -> f64 {
    if h.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let t = lambda / h.sqrt();
    if t > R_ASYMPTOTIC_SWITCH {
        r_asymptotic(t, h)
    } else {
        lambda * (h / (2.0 * PI)).sqrt() * (-lambda * lambda / (2.0 * h)).exp()
            - (lambda * lambda + h) * q_function(t)
    }
}

/// `-h pdf(t) [(1 + t^2) R(t) - t]` where the bracket is expanded as
/// `sum_{m>=1} (-1)^(m+1) 2m (2m-1)!! t^-(2m+1)` and truncated at its
/// smallest term.
fn r_asymptotic(t: f64, h: f64) -> f64 {
    let inv_t2 = 1.0 / (t * t);
    let mut coeff = 2.0;
    let mut power = inv_t2 / t;
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for m in 1..200 {
        let term = coeff * power;
        if term.abs() > prev {
            break;
        }
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
        let m = m as f64;
        coeff *= -(2.0 * m + 1.0) * (m + 1.0) / m;
        power *= inv_t2;
    }
    -h * normal_pdf(t) * sum
}

/// The per-coordinate potential `phi_lambda(h; q_hat)`:
/// `-(|h| - lambda)^2 / (2 q_hat)` outside the dead zone `|h| <= lambda`, zero inside.
pub fn phi_lambda_oracle(h_arg: f64, lambda: f64, q_hat: f64) -> Result<f64> {
    if !(q_hat > 0.0) {
        return Err(Error::Domain {
            func: "phi_lambda_oracle",
            detail: format!("q_hat must be positive, got {q_hat}"),
        });
    }
    let excess = h_arg.abs() - lambda;
    Ok(if excess > 0.0 {
        -excess * excess / (2.0 * q_hat)
    } else {
        0.0
    })
}
