//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails or overruns its time budget.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sparse_lab::decoder::oracle::{grid_oracle, vertex_oracle, GridOracleConfig};
use sparse_lab::decoder::{decode, DecoderConfig, ProblemInstance};
use sparse_lab::experiments::{run_monte_carlo, sweep_phase_diagram, EnsembleSpec, LambdaMode, DEFAULT_SUCCESS_TOL};
use sparse_lab::replica::{
    find_critical_rho_x, optimize_lambda, solve_mse_fixed_point, LambdaObjective, MseOutcome, SolverConfig,
    SystemParams,
};
use sparse_lab::special_fns::oracle::{central_difference, truncated_moment_oracles, scaled_phi_expectation, QuadratureConfig};
use sparse_lab::special_fns::{normal_pdf, q_function, r_lambda, s_func};

/// Seed for every Monte Carlo criterion. Fixed before any run and never
/// tuned against the outcome.
const MC_SEED: u64 = 1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn threshold_at_unit_lambda() -> Outcome {
    let rc = find_critical_rho_x(0.5, 1.0, 0.1, &SolverConfig::default()).map_err(err)?;
    check((rc - 0.0770).abs() <= 5e-4, format!("critical rho_x = {rc:.6} (target 0.0770 +- 5e-4)"))
}

fn threshold_at_optimal_lambda() -> Outcome {
    let opt = optimize_lambda(&LambdaObjective::CriticalRhoX { alpha: 0.5, rho_w: 0.1 }, &SolverConfig::default())
        .map_err(err)?;
    check(
        (opt.value - 0.1030).abs() <= 1e-3,
        format!("critical rho_x = {:.6} at lambda = {:.4} (target 0.1030 +- 1e-3)", opt.value, opt.lambda),
    )
}

/// Route one: the variance-free threshold system. Route two: for each
/// variance pair, the zero of the predicted root-mse extrapolated from three
/// points just inside the error phase, where it vanishes linearly.
fn variance_independence() -> Outcome {
    let cfg = SolverConfig {
        bisection_tol: 1e-10,
        ..SolverConfig::default()
    };
    let rc = find_critical_rho_x(0.5, 1.0, 0.1, &cfg).map_err(err)?;
    let h = 1.25e-4;
    let mut roots = Vec::new();
    for (sx, sw) in [(1.0, 1.0), (4.0, 0.25), (0.01, 100.0)] {
        let mut pts = Vec::new();
        for k in [4.0, 2.0, 1.0] {
            let r = rc + k * h;
            let p = SystemParams::new(0.5, 1.0, r, 0.1, sx, sw).map_err(err)?;
            let out = solve_mse_fixed_point(&p, &cfg).map_err(err)?;
            if out.is_perfect() {
                return Err(format!("({sx}, {sw}): perfect verdict above the threshold at {r}"));
            }
            pts.push((r, (out.mse() / sx).sqrt()));
        }
        let below = SystemParams::new(0.5, 1.0, rc - 2e-3, 0.1, sx, sw).map_err(err)?;
        if !solve_mse_fixed_point(&below, &cfg).map_err(err)?.is_perfect() {
            return Err(format!("({sx}, {sw}): error verdict below the threshold"));
        }
        roots.push(quadratic_root(&pts, rc - 5.0 * h));
    }
    let spread = roots.iter().fold(0.0f64, |w, r| w.max((r - rc).abs()));
    check(
        spread <= 1e-6,
        format!("threshold {rc:.9}; extrapolated zeros {roots:.9?}; worst deviation {spread:.2e}"),
    )
}

/// Zero of the interpolating quadratic between `lo` and the last point.
fn quadratic_root(pts: &[(f64, f64)], lo: f64) -> f64 {
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[1];
    let (x2, y2) = pts[2];
    let q = |x: f64| {
        y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
    };
    let (mut a, mut b) = (lo, x2);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if q(m).signum() == q(b).signum() {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn penalty_expectation_suite() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_value = 0.0f64;
    let mut worst_deriv = 0.0f64;
    for _ in 0..50 {
        let (l, h, qh) = (
            rng.random_range(0.05..10.0),
            rng.random_range(0.05..10.0),
            rng.random_range(0.05..10.0),
        );
        let lhs = scaled_phi_expectation(l, h, qh, &cfg).map_err(err)?;
        let rhs = r_lambda(l, h).map_err(err)?;
        worst_value = worst_value.max((lhs - rhs).abs() / rhs.abs().max(1.0));

        let (c1, c2, x): (f64, f64, f64) =
            (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0), rng.random_range(-2.0..2.0));
        let hx = |x: f64| c1 + c2 * x * x;
        let fd = central_difference(|x| r_lambda(l, hx(x)).unwrap_or(f64::NAN), x, 1e-5);
        let exact = -(2.0 * c2 * x) * q_function(l / hx(x).sqrt());
        worst_deriv = worst_deriv.max((fd - exact).abs() / exact.abs().max(1e-3));
    }
    check(
        worst_value <= 1e-8 && worst_deriv <= 1e-5,
        format!("expectation deviation {worst_value:.2e} (<= 1e-8), derivative deviation {worst_deriv:.2e} (<= 1e-5)"),
    )
}

fn truncated_moment_suite() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a: f64 = rng.random_range(0.01..8.0);
        let (tail, inner) = truncated_moment_oracles(a, &cfg).map_err(err)?;
        let inner_closed = 1.0 - 2.0 * q_function(a) - 2.0 * a * normal_pdf(a);
        worst = worst
            .max((tail - 2.0 * q_function(a)).abs())
            .max((inner - inner_closed).abs())
            .max((s_func(a).map_err(err)? - inner / (a * a)).abs());
    }
    check(worst <= 1e-8, format!("worst deviation {worst:.2e} over 50 points (<= 1e-8)"))
}

fn diagnostic_identity() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut count, mut draws, mut worst) = (0, 0, 0.0f64);
    while count < 20 {
        draws += 1;
        if draws > 500 {
            return Err(format!("only {count} error-phase points in 500 draws"));
        }
        let p = SystemParams::new(
            rng.random_range(0.3..0.9),
            rng.random_range(0.3..3.0),
            rng.random_range(0.1..0.4),
            rng.random_range(0.02..0.3),
            rng.random_range(0.25..4.0),
            rng.random_range(0.25..4.0),
        )
        .map_err(err)?;
        if let MseOutcome::Converged(s) = solve_mse_fixed_point(&p, &cfg).map_err(err)? {
            worst = worst.max(s.diagnostic_gap(&p).abs());
            count += 1;
        }
    }
    check(worst <= 1e-8, format!("worst gap {worst:.2e} over {count} fixed points (<= 1e-8)"))
}

fn simulation_agreement() -> Outcome {
    let dcfg = DecoderConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for rho_x in [0.11, 0.13, 0.15, 0.18, 0.22] {
        let spec = EnsembleSpec {
            n: 256,
            params: SystemParams::new(0.5, 1.0, rho_x, 0.1, 1.0, 1.0).map_err(err)?,
            trials: 50,
            base_seed: MC_SEED,
        };
        let agg = run_monte_carlo(&spec, &dcfg, DEFAULT_SUCCESS_TOL).map_err(err)?;
        let pred = agg.replica_mse.ok_or("no replica prediction")?;
        let rel = (agg.mean_mse - pred) / pred;
        let good = rel.abs() <= 0.15 && agg.non_converged == 0;
        ok &= good;
        lines.push(format!(
            "rho_x {rho_x}: empirical {:.5} replica {pred:.5} ({:+.1}%){}",
            agg.mean_mse,
            100.0 * rel,
            if agg.non_converged > 0 { format!(", {} unconverged", agg.non_converged) } else { String::new() }
        ));
    }
    check(ok, lines.join("; "))
}

fn perfect_recovery() -> Outcome {
    let spec = EnsembleSpec {
        n: 256,
        params: SystemParams::new(0.5, 1.0, 0.05, 0.1, 1.0, 1.0).map_err(err)?,
        trials: 50,
        base_seed: MC_SEED,
    };
    let agg = run_monte_carlo(&spec, &DecoderConfig::default(), DEFAULT_SUCCESS_TOL).map_err(err)?;
    check(
        agg.success_fraction >= 0.9 && agg.median_mse <= 1e-8,
        format!("success {:.2} (>= 0.9), median mse {:.2e} (<= 1e-8)", agg.success_fraction, agg.median_mse),
    )
}

/// Decoder against a pruned grid search and, separately, against exact
/// vertex enumeration.
fn decoder_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = DecoderConfig::default();
    let (mut grid_dev, mut vertex_dev, mut worst_cert) = (0.0f64, 0.0f64, 0.0f64);
    let mut uncertified = 0;
    for _ in 0..25 {
        let n = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=4usize);
        let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = rng.random_range(0.5..2.0);
        let inst = ProblemInstance::new(a, y).map_err(err)?;
        let res = decode(&inst, lambda, &cfg).map_err(err)?;
        let (_, fg) = grid_oracle(&inst, lambda, &GridOracleConfig::default()).map_err(err)?;
        let (_, fv) = vertex_oracle(&inst, lambda).map_err(err)?;
        grid_dev = grid_dev.max((res.objective - fg).abs());
        vertex_dev = vertex_dev.max((res.objective - fv).abs());
        worst_cert = worst_cert.max(res.certificate);
        if !res.converged {
            uncertified += 1;
        }
    }
    check(
        grid_dev <= 1e-5 && vertex_dev <= 1e-5 && uncertified == 0,
        format!(
            "grid deviation {grid_dev:.2e}, vertex deviation {vertex_dev:.2e} (<= 1e-5); \
             worst certificate {worst_cert:.2e}, {uncertified} uncertified"
        ),
    )
}

fn optimal_lambda_dominance() -> Outcome {
    let grid: Vec<f64> = (1..=12).map(|i| 0.02 * i as f64).collect();
    let deltas = [0.2, 0.1, 0.02];
    let rows = sweep_phase_diagram(&grid, &deltas, LambdaMode::UnitAndOptimal, &SolverConfig::default()).map_err(err)?;
    let mut excess = f64::NEG_INFINITY;
    let mut worst_drop = 0.0f64;
    for curve in rows.chunks(grid.len()) {
        for r in curve {
            let opt = r.alpha_c_optimal.ok_or("missing optimal column")?;
            excess = excess.max(opt - r.alpha_c_unit);
        }
        for w in curve.windows(2) {
            worst_drop = worst_drop.max(w[0].alpha_c_unit - w[1].alpha_c_unit);
            worst_drop = worst_drop.max(w[0].alpha_c_optimal.unwrap_or(f64::NAN) - w[1].alpha_c_optimal.unwrap_or(f64::NAN));
        }
    }
    check(
        excess <= 1e-6 && worst_drop <= 0.0 && !worst_drop.is_nan(),
        format!(
            "{} rows; max(optimal - unit) = {excess:.3e} (<= 1e-6); largest decrease along rho_x {worst_drop:.2e} (<= 0)",
            rows.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("threshold at unit lambda", Duration::from_secs(5), threshold_at_unit_lambda),
        ("threshold at optimal lambda", Duration::from_secs(120), threshold_at_optimal_lambda),
        ("variance independence", Duration::from_secs(15), variance_independence),
        ("penalty expectation identities", Duration::from_secs(10), penalty_expectation_suite),
        ("truncated moment identities", Duration::from_secs(10), truncated_moment_suite),
        ("mse diagnostic identity", Duration::from_secs(30), diagnostic_identity),
        ("simulation vs replica mse", Duration::from_secs(1200), simulation_agreement),
        ("perfect-phase recovery", Duration::from_secs(300), perfect_recovery),
        ("decoder vs brute-force oracles", Duration::from_secs(120), decoder_oracles),
        ("optimal lambda dominance", Duration::from_secs(600), optimal_lambda_dominance),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > *budget;
        let (status, detail) = match outcome {
            Ok(d) if !over => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over budget")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} {:>2} {name} [{:.1}s / {}s]: {detail}",
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
