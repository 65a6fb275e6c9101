//! Restarted primal-dual iteration with active-set polish.
//!
//! With `F(z) = ||z - y||_1` and `G(x) = lambda ||x||_1` both proximal maps
//! are closed form: the dual step clips `p + sigma (A xbar - y)` to the unit
//! box and the primal step soft-thresholds. The dual objective is `-<p, y>`
//! over `||p||_inf <= 1, ||A^T p||_inf <= lambda`; rescaling `p` into that
//! set gives a duality gap at every check.
//!
//! Plain iteration stalls near LP vertices, so every `check_interval` steps
//! the gap of the current and of the averaged iterate is compared against
//! the gap at the last restart. The iteration restarts from the better one
//! when the gap has shrunk enough, when it has shrunk somewhat and stopped
//! improving, or when the current run has grown long relative to the total.
//! Each restart rebalances the primal and dual step sizes by the distances
//! the two iterates moved. When the gap passes the tolerance the support and
//! the zero residuals are read off the iterate and the small least-squares
//! systems for the exact vertex and its dual are solved.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::opnorm::estimate_operator_norm;
use super::{objective_unchecked, DecodeResult, DecoderConfig, ProblemInstance};

/// Subgradient selections and the resulting optimality residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `||A^T u - lambda v||_inf`
    pub value: f64,
    /// Selection from the subdifferential of `||.||_1` at `y - A x`.
    pub u: DVector<f64>,
    /// Selection from the subdifferential of `||.||_1` at `x`.
    pub v: DVector<f64>,
}

/// Optimality residual at `x`.
///
/// Residual entries and coordinates with magnitude at most `zero_tol`
/// (relative to `1 + ||y||_inf` and `1 + ||x||_inf`) count as zero. On the
/// zero residual rows `u` starts from `dual_hint` (or 0) and receives the
/// least-norm correction that balances the support equations; free entries
/// of `v` are then chosen to minimize the residual.
pub fn certificate(
    instance: &ProblemInstance,
    x: &DVector<f64>,
    lambda: f64,
    dual_hint: Option<&DVector<f64>>,
    zero_tol: f64,
) -> Result<Certificate> {
    if x.len() != instance.n() {
        return Err(Error::Dimension(format!(
            "x has length {} but the instance has {} unknowns",
            x.len(),
            instance.n()
        )));
    }
    if let Some(h) = dual_hint {
        if h.len() != instance.m() {
            return Err(Error::Dimension("dual hint must have length M".into()));
        }
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
    }
    let a = instance.a();
    let r = instance.y() - a * x;
    let r_tol = zero_tol * (1.0 + instance.y().amax());
    let x_tol = zero_tol * (1.0 + x.amax());

    let zero_rows: Vec<usize> = (0..r.len()).filter(|&i| r[i].abs() <= r_tol).collect();
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > x_tol).collect();

    let mut u = DVector::from_fn(r.len(), |i, _| {
        if r[i].abs() > r_tol {
            r[i].signum()
        } else {
            dual_hint.map_or(0.0, |h| h[i].clamp(-1.0, 1.0))
        }
    });
    if !zero_rows.is_empty() && !support.is_empty() {
        let atu = a.tr_mul(&u);
        let target = DVector::from_fn(support.len(), |k, _| {
            let j = support[k];
            lambda * x[j].signum() - atu[j]
        });
        let b = DMatrix::from_fn(support.len(), zero_rows.len(), |k, l| a[(zero_rows[l], support[k])]);
        if let Some(delta) = min_norm_solve(&b, &target) {
            for (l, &i) in zero_rows.iter().enumerate() {
                u[i] = (u[i] + delta[l]).clamp(-1.0, 1.0);
            }
        }
    }
    let atu = a.tr_mul(&u);
    let mut v = DVector::from_fn(x.len(), |j, _| (atu[j] / lambda).clamp(-1.0, 1.0));
    for &j in &support {
        v[j] = x[j].signum();
    }
    let value = (&atu - &v * lambda).amax();
    Ok(Certificate { value, u, v })
}

/// Minimum-norm least-squares solution of `b z = rhs`.
fn min_norm_solve(b: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = b.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    svd.solve(rhs, eps).ok()
}

/// Restart once the gap has fallen this far and stopped improving.
const NECESSARY_DECAY: f64 = 0.8;
/// Restart when the current run is this fraction of all iterations so far.
const ARTIFICIAL_RESTART: f64 = 0.36;

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Objective, feasible dual value, and gap for one primal-dual pair.
struct Assessment {
    objective: f64,
    gap: f64,
}

fn assess(instance: &ProblemInstance, x: &DVector<f64>, p: &DVector<f64>, lambda: f64) -> Assessment {
    let objective = objective_unchecked(instance, x, lambda);
    let atp_max = instance.a().tr_mul(p).amax();
    let scale = if atp_max > lambda { lambda / atp_max } else { 1.0 };
    let dual = -scale * p.dot(instance.y());
    Assessment {
        objective,
        gap: (objective - dual).max(0.0),
    }
}

/// Dual value of a subgradient selection `u` rescaled into the feasible set.
fn dual_value_of(instance: &ProblemInstance, u: &DVector<f64>, lambda: f64) -> f64 {
    let atu_max = instance.a().tr_mul(u).amax();
    let scale = if atu_max > lambda { lambda / atu_max } else { 1.0 };
    scale * u.dot(instance.y())
}

struct Finished {
    x: DVector<f64>,
    objective: f64,
    gap: f64,
    certificate: f64,
    polished: bool,
    accepted: bool,
}

struct Tolerances {
    gap: f64,
    certificate: f64,
}

impl Tolerances {
    fn new(instance: &ProblemInstance, cfg: &DecoderConfig) -> Self {
        let sign_y = instance.y().map(|v| if v == 0.0 { 0.0 } else { v.signum() });
        Self {
            gap: cfg.dual_tol,
            certificate: cfg.primal_tol * (1.0 + instance.a().tr_mul(&sign_y).amax()),
        }
    }

    fn gap_ok(&self, gap: f64, objective: f64) -> bool {
        gap <= self.gap * (1.0 + objective)
    }
}

/// Tries to certify `x`, polishing first if enabled. Falls back to `x`
/// itself when no polished point is accepted.
fn finish(
    instance: &ProblemInstance,
    x: &DVector<f64>,
    p: &DVector<f64>,
    lambda: f64,
    cfg: &DecoderConfig,
    tols: &Tolerances,
) -> Finished {
    let hint = -p;
    let base = assess(instance, x, p, lambda);
    if cfg.polish {
        let r = instance.y() - instance.a() * x;
        let y_scale = 1.0 + instance.y().amax();
        let x_scale = 1.0 + x.amax();
        for &t in &[1e-9, 1e-7, 1e-5, 1e-3] {
            let Some(xp) = polish(instance, x, &r, t * x_scale, t * y_scale) else {
                continue;
            };
            let Ok(cert) = certificate(instance, &xp, lambda, Some(&hint), cfg.zero_tol) else {
                continue;
            };
            let objective = objective_unchecked(instance, &xp, lambda);
            let gap = (objective - dual_value_of(instance, &cert.u, lambda)).max(0.0);
            if cert.value <= tols.certificate && tols.gap_ok(gap, objective) && objective <= base.objective + gap {
                return Finished {
                    x: xp,
                    objective,
                    gap,
                    certificate: cert.value,
                    polished: true,
                    accepted: true,
                };
            }
        }
    }
    let cert = certificate(instance, x, lambda, Some(&hint), cfg.zero_tol)
        .map(|c| c.value)
        .unwrap_or(f64::INFINITY);
    Finished {
        x: x.clone(),
        objective: base.objective,
        gap: base.gap,
        certificate: cert,
        polished: false,
        accepted: cert <= tols.certificate && tols.gap_ok(base.gap, base.objective),
    }
}

/// Vertex suggested by `x`: keep the coordinates above `x_tol`, zero the
/// rest, and move the kept ones by the least amount that zeroes the
/// residual rows below `r_tol`.
fn polish(instance: &ProblemInstance, x: &DVector<f64>, r: &DVector<f64>, x_tol: f64, r_tol: f64) -> Option<DVector<f64>> {
    let a = instance.a();
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > x_tol).collect();
    let zero_rows: Vec<usize> = (0..r.len()).filter(|&i| r[i].abs() <= r_tol).collect();
    let mut xp = DVector::zeros(x.len());
    if support.is_empty() {
        return Some(xp);
    }
    for &j in &support {
        xp[j] = x[j];
    }
    if zero_rows.is_empty() {
        return Some(xp);
    }
    let sub = DMatrix::from_fn(zero_rows.len(), support.len(), |l, k| a[(zero_rows[l], support[k])]);
    let ax = a * &xp;
    let rhs = DVector::from_fn(zero_rows.len(), |l, _| {
        let i = zero_rows[l];
        instance.y()[i] - ax[i]
    });
    let delta = min_norm_solve(&sub, &rhs)?;
    for (k, &j) in support.iter().enumerate() {
        xp[j] += delta[k];
    }
    xp.iter().all(|v| v.is_finite()).then_some(xp)
}

/// Minimizes `||y - A x||_1 + lambda ||x||_1` starting from `x = 0`.
///
/// Returns an error for `lambda <= 0`, a zero matrix or an invalid config.
/// Running out of iterations is not an error: the best point found is
/// returned with `converged = false`.
pub fn decode(instance: &ProblemInstance, lambda: f64, cfg: &DecoderConfig) -> Result<DecodeResult> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
    }
    let a = instance.a();
    let y = instance.y();
    let (m, n) = (instance.m(), instance.n());
    let norm = estimate_operator_norm(a, cfg.power_iters, cfg.power_tol);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let eta = cfg.step_scale / norm;
    // Primal weight: tau = eta / omega, sigma = eta * omega.
    let mut omega = 1.0f64;
    let (mut tau, mut sigma) = (eta, eta);
    let tols = Tolerances::new(instance, cfg);
    let zero_objective = y.lp_norm(1);

    let mut x = DVector::zeros(n);
    let mut p = DVector::zeros(m);
    let mut trace = vec![zero_objective];
    let mut best_objective = zero_objective;

    let initial = assess(instance, &x, &p, lambda);
    if tols.gap_ok(initial.gap, initial.objective) {
        let f = finish(instance, &x, &p, lambda, cfg, &tols);
        if f.accepted {
            return Ok(wrap(f, 0, true, 0.0, 0.0, trace, zero_objective, instance, lambda));
        }
    }

    let mut x_bar = x.clone();
    let mut x_old = x.clone();
    let mut p_old = p.clone();
    let mut ax_bar = DVector::zeros(m);
    let mut atp = DVector::zeros(n);
    let mut x_sum = DVector::zeros(n);
    let mut p_sum = DVector::zeros(m);
    let mut since_restart = 0usize;
    let mut restart_gap = initial.gap;
    let mut prev_gap = f64::INFINITY;
    let mut restart_x = x.clone();
    let mut restart_p = p.clone();
    let mut gap_target = cfg.dual_tol;
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut last: Option<Finished> = None;

    for it in 1..=cfg.max_iters {
        ax_bar.gemv(1.0, a, &x_bar, 0.0);
        p_old.copy_from(&p);
        for i in 0..m {
            p[i] = (p[i] + sigma * (ax_bar[i] - y[i])).clamp(-1.0, 1.0);
        }
        atp.gemv_tr(1.0, a, &p, 0.0);
        x_old.copy_from(&x);
        for j in 0..n {
            x[j] = soft_threshold(x[j] - tau * atp[j], tau * lambda);
        }
        for j in 0..n {
            x_bar[j] = 2.0 * x[j] - x_old[j];
        }
        x_sum += &x;
        p_sum += &p;
        since_restart += 1;

        if it % cfg.check_interval != 0 && it != cfg.max_iters {
            continue;
        }
        primal_residual = (&x - &x_old).amax() / tau;
        dual_residual = (&p - &p_old).amax() / sigma;

        let cur = assess(instance, &x, &p, lambda);
        let inv = 1.0 / since_restart as f64;
        let x_avg = &x_sum * inv;
        let p_avg = &p_sum * inv;
        let avg = assess(instance, &x_avg, &p_avg, lambda);
        best_objective = best_objective.min(cur.objective).min(avg.objective);
        trace.push(best_objective);

        let use_avg = avg.gap / (1.0 + avg.objective) < cur.gap / (1.0 + cur.objective);
        let (cand_x, cand_p, cand) = if use_avg { (&x_avg, &p_avg, &avg) } else { (&x, &p, &cur) };

        if cand.gap <= gap_target * (1.0 + cand.objective) || it == cfg.max_iters {
            let f = finish(instance, cand_x, cand_p, lambda, cfg, &tols);
            if f.objective < best_objective {
                best_objective = f.objective;
                *trace.last_mut().expect("trace starts nonempty") = best_objective;
            }
            if f.accepted {
                return Ok(wrap(f, it, true, primal_residual, dual_residual, trace, zero_objective, instance, lambda));
            }
            last = Some(f);
            gap_target = (gap_target * 0.1).max(1e-16);
        }

        let sufficient = cand.gap <= cfg.restart_factor * restart_gap;
        let stalled = cand.gap <= NECESSARY_DECAY * restart_gap && cand.gap > prev_gap;
        let long_run = since_restart as f64 >= ARTIFICIAL_RESTART * it as f64;
        prev_gap = cand.gap;
        if sufficient || stalled || long_run {
            if use_avg {
                x.copy_from(&x_avg);
                p.copy_from(&p_avg);
            }
            let dx = (&x - &restart_x).norm();
            let dp = (&p - &restart_p).norm();
            if dx > 1e-10 && dp > 1e-10 {
                omega = (0.5 * (dp / dx).ln() + 0.5 * omega.ln()).exp();
                tau = eta / omega;
                sigma = eta * omega;
            }
            restart_x.copy_from(&x);
            restart_p.copy_from(&p);
            x_bar.copy_from(&x);
            x_sum.fill(0.0);
            p_sum.fill(0.0);
            since_restart = 0;
            restart_gap = cand.gap;
            prev_gap = f64::INFINITY;
        }
    }

    let f = last.unwrap_or_else(|| finish(instance, &x, &p, lambda, cfg, &tols));
    Ok(wrap(
        f,
        cfg.max_iters,
        false,
        primal_residual,
        dual_residual,
        trace,
        zero_objective,
        instance,
        lambda,
    ))
}

#[allow(clippy::too_many_arguments)]
fn wrap(
    f: Finished,
    iterations: usize,
    converged: bool,
    primal_residual: f64,
    dual_residual: f64,
    trace: Vec<f64>,
    zero_objective: f64,
    instance: &ProblemInstance,
    lambda: f64,
) -> DecodeResult {
    let (x_hat, objective) = if f.objective > zero_objective {
        (DVector::zeros(instance.n()), zero_objective)
    } else {
        (f.x, f.objective)
    };
    debug_assert_eq!(objective, objective_unchecked(instance, &x_hat, lambda));
    DecodeResult {
        x_hat,
        objective,
        iterations,
        converged,
        gap: f.gap,
        certificate: f.certificate,
        primal_residual,
        dual_residual,
        objective_trace: trace,
        polished: f.polished,
    }
}
