//! Quick invariant checks of every module, run by the `selftest` command.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::decoder::oracle::vertex_oracle;
use crate::decoder::{decode, estimate_operator_norm, DecoderConfig, ProblemInstance};
use crate::replica::{find_critical_rho_x, solve_mse_fixed_point, MseOutcome, SolverConfig, SystemParams};
use crate::special_fns::oracle::{central_difference, truncated_moment_oracles, q_by_quadrature, scaled_phi_expectation, QuadratureConfig};
use crate::special_fns::{q_function, r_lambda, s_func, INV_SQRT_2PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Worst deviation seen (or the measured value for range checks).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn within(suite: &'static str, name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            value: deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

/// Largest value of `f` over `count` draws, NaN-propagating, or `inf` on error.
fn worst<F>(count: usize, mut f: F) -> f64
where
    F: FnMut(usize) -> crate::Result<f64>,
{
    let mut w = 0.0f64;
    for i in 0..count {
        match f(i) {
            Ok(v) if v.is_nan() => return f64::NAN,
            Ok(v) => w = w.max(v),
            Err(_) => return f64::INFINITY,
        }
    }
    w
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn special_function_checks(seed: u64) -> Vec<Check> {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let q_dev = worst(5, |i| {
        let x = 0.5 * i as f64;
        Ok((q_by_quadrature(x, &cfg)? - q_function(x)).abs())
    });
    out.push(Check::within("special_fns", "tail probability vs quadrature", q_dev, 1e-10));

    let triples: Vec<(f64, f64, f64)> = (0..10)
        .map(|_| {
            (
                rng.random_range(0.05..10.0),
                rng.random_range(0.05..10.0),
                rng.random_range(0.05..10.0),
            )
        })
        .collect();
    let dev = worst(triples.len(), |i| {
        let (l, h, qh) = triples[i];
        Ok(rel_err(scaled_phi_expectation(l, h, qh, &cfg)?, r_lambda(l, h)?))
    });
    out.push(Check::within("special_fns", "penalty expectation vs r", dev, 1e-8));

    let dev = worst(10, |_| {
        let (c1, c2) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
        let (x, l) = (rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0));
        let h = |x: f64| c1 + c2 * x * x;
        let fd = central_difference(|x| r_lambda(l, h(x)).unwrap_or(f64::NAN), x, 1e-5);
        let exact = -(2.0 * c2 * x) * q_function(l / h(x).sqrt());
        Ok((fd - exact).abs() / exact.abs().max(1e-3))
    });
    out.push(Check::within("special_fns", "derivative of r", dev, 1e-5));

    let points: Vec<f64> = (0..10).map(|_| rng.random_range(0.01..8.0)).collect();
    let dev = worst(points.len(), |i| {
        let a: f64 = points[i];
        let (tail, inner) = truncated_moment_oracles(a, &cfg)?;
        let inner_closed = 1.0 - 2.0 * q_function(a) - 2.0 * a * INV_SQRT_2PI * (-0.5 * a * a).exp();
        Ok((tail - 2.0 * q_function(a)).abs().max((inner - inner_closed).abs()))
    });
    out.push(Check::within("special_fns", "truncated moments vs closed form", dev, 1e-8));

    let dev = worst(points.len(), |i| {
        let a = points[i];
        let (_, inner) = truncated_moment_oracles(a, &cfg)?;
        Ok((s_func(a)? - inner / (a * a)).abs())
    });
    out.push(Check::within("special_fns", "s vs truncated second moment", dev, 1e-8));
    out
}

pub fn replica_checks() -> Vec<Check> {
    let cfg = SolverConfig::default();
    let mut out = Vec::new();
    let rc = find_critical_rho_x(0.5, 1.0, 0.1, &cfg).unwrap_or(f64::NAN);
    out.push(Check::within("replica", "critical density at unit lambda", (rc - 0.0770).abs(), 5e-4));

    let dev = worst(4, |i| {
        let p = SystemParams::new(0.5, 1.0, 0.12 + 0.05 * i as f64, 0.1, 1.0, 1.0)?;
        match solve_mse_fixed_point(&p, &cfg)? {
            MseOutcome::Converged(s) => Ok(s.diagnostic_gap(&p).abs()),
            MseOutcome::Perfect(_) => Ok(f64::INFINITY),
        }
    });
    out.push(Check::within("replica", "mse equals overlap form", dev, 1e-8));

    // Phase verdicts a little either side of the boundary must not depend
    // on the variances.
    let mismatches = worst(3, |i| {
        let (sx, sw) = [(1.0, 1.0), (4.0, 0.25), (0.01, 100.0)][i];
        let below = SystemParams::new(0.5, 1.0, rc - 2e-3, 0.1, sx, sw)?;
        let above = SystemParams::new(0.5, 1.0, rc + 2e-3, 0.1, sx, sw)?;
        let ok = solve_mse_fixed_point(&below, &cfg)?.is_perfect() && !solve_mse_fixed_point(&above, &cfg)?.is_perfect();
        Ok(if ok { 0.0 } else { 1.0 })
    });
    out.push(Check::within("replica", "phase verdict independent of variances", mismatches, 0.0));
    out
}

pub fn decoder_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let a = DMatrix::from_fn(32, 64, |_, _| rng.sample::<f64, _>(StandardNormal) / 8.0);
    let svd_max = a.clone().svd(false, false).singular_values.max();
    let est = estimate_operator_norm(&a, 200, 1e-12);
    out.push(Check::within("decoder", "operator norm vs SVD", (est - svd_max).abs() / svd_max, 1e-8));

    let cfg = DecoderConfig::default();
    let mut obj_dev = 0.0f64;
    let mut cert_excess = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = rng.random_range(0.2..2.0);
        let Ok(inst) = ProblemInstance::new(a, y) else {
            obj_dev = f64::INFINITY;
            continue;
        };
        match (decode(&inst, lambda, &cfg), vertex_oracle(&inst, lambda)) {
            (Ok(res), Ok((_, f))) => {
                obj_dev = obj_dev.max((res.objective - f).abs());
                if !res.converged {
                    cert_excess = f64::INFINITY;
                }
            }
            _ => obj_dev = f64::INFINITY,
        }
    }
    out.push(Check::within("decoder", "objective vs vertex enumeration", obj_dev, 1e-5));
    out.push(Check::within("decoder", "certificates within tolerance", cert_excess, 0.0));
    out
}

/// Every check, in a fixed order.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = special_function_checks(seed);
    out.extend(replica_checks());
    out.extend(decoder_checks(seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_all(3);
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(checks.len() >= 10);
    }
}
