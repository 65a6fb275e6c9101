//! Quadrature references for the closed forms in [`crate::special_fns`].
//!
//! These integrate against the standard Gaussian measure `Dt` with adaptive
//! 15-point Gauss-Kronrod on a truncated window. They are slow and exist
//! only to certify the closed forms (unit tests and the `selftest`
//! subcommand).

use crate::error::{Error, Result};
use crate::special_fns::{normal_pdf, phi_lambda_oracle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Window half-width in standard deviations.
    pub integration_halfwidth: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 4000,
            integration_halfwidth: 10.0,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParams("abs_tol must be positive".into()));
        }
        if !(self.integration_halfwidth >= 8.0) {
            return Err(Error::InvalidParams(
                "integration_halfwidth must be at least 8".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = hl * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * hl, ((kronrod - gauss) * hl).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
///
/// Intervals are bisected, largest error first, until the summed error
/// estimate drops below `abs_tol` or the subdivision budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    for _ in 0..cfg.max_subdivisions {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= cfg.abs_tol {
            return Ok(intervals.iter().map(|iv| iv.2).sum());
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    let achieved: f64 = intervals.iter().map(|iv| iv.3).sum();
    if achieved <= cfg.abs_tol {
        Ok(intervals.iter().map(|iv| iv.2).sum())
    } else {
        Err(Error::Quadrature {
            requested: cfg.abs_tol,
            achieved,
        })
    }
}

/// `int g(t) Dt` over the truncated window, split at the given breakpoints
/// so each piece has a smooth integrand.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(
    g: F,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let w = cfg.integration_halfwidth;
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && b.abs() < w)
        .collect();
    cuts.push(-w);
    cuts.push(w);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let piece_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol / (cuts.len() - 1) as f64,
        ..*cfg
    };
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += integrate(|t| g(t) * normal_pdf(t), pair[0], pair[1], &piece_cfg)?;
    }
    Ok(total)
}

/// `(int 1{|t| > a} Dt, int t^2 1{|t| < a} Dt)` by quadrature.
pub fn truncated_moment_oracles(a: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(Error::Domain {
            func: "truncated_moment_oracles",
            detail: format!("a must be positive, got {a}"),
        });
    }
    let tail = gaussian_expectation(|t| if t.abs() > a { 1.0 } else { 0.0 }, &[-a, a], cfg)?;
    let inner = gaussian_expectation(|t| if t.abs() < a { t * t } else { 0.0 }, &[-a, a], cfg)?;
    Ok((tail, inner))
}

/// `q_hat * int phi_lambda(z sqrt(h); q_hat) Dz`, which should reproduce
/// `r_lambda(lambda, h)`.
pub fn scaled_phi_expectation(lambda: f64, h: f64, q_hat: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(h > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain {
            func: "scaled_phi_expectation",
            detail: format!("lambda and h must be positive, got lambda={lambda}, h={h}"),
        });
    }
    phi_lambda_oracle(0.0, lambda, q_hat)?;
    let root_h = h.sqrt();
    let edge = lambda / root_h;
    let e = gaussian_expectation(
        |z| phi_lambda_oracle(z * root_h, lambda, q_hat).unwrap_or(f64::NAN),
        &[-edge, edge],
        cfg,
    )?;
    Ok(q_hat * e)
}

/// Gaussian tail `P(Z > x)` by quadrature of the density on `[x, x + halfwidth]`.
pub fn q_by_quadrature(x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate(normal_pdf, x, x + cfg.integration_halfwidth, cfg)
}

/// Central finite difference with step `step`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}
