//! Decoding many sampled instances and summarizing the errors.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{decode, DecoderConfig};
use crate::error::Result;
use crate::replica::{solve_mse_fixed_point, SolverConfig};

use super::{sample_instance, EnsembleSpec, SUPPORT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial_index: u64,
    /// `||x_hat - x0||^2 / N`
    pub mse: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Fraction of the estimated support that is true support.
    pub support_precision: f64,
    /// Fraction of the true support that is recovered.
    pub support_recall: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Decodes that hit the iteration cap. They are excluded from the
    /// error statistics and never count as successes.
    pub non_converged: usize,
    /// Mean and standard error over converged trials. The standard error
    /// is NaN with fewer than two of them.
    pub mean_mse: f64,
    pub std_error: f64,
    pub median_mse: f64,
    /// Converged trials with mse at most the success tolerance, over all trials.
    pub success_fraction: f64,
    pub success_tol: f64,
    /// Replica prediction for the same parameters, zero in the perfect
    /// phase and `None` if the fixed point could not be solved.
    pub replica_mse: Option<f64>,
}

/// Decodes one trial of the ensemble.
pub fn run_trial(spec: &EnsembleSpec, trial_index: u64, cfg: &DecoderConfig) -> Result<TrialSummary> {
    let start = Instant::now();
    let inst = sample_instance(spec, trial_index)?;
    let res = decode(&inst, spec.params.lambda, cfg)?;
    let x0 = inst.x0().expect("sampled instances carry ground truth");
    let mse = (&res.x_hat - x0).norm_squared() / spec.n as f64;
    let est: Vec<bool> = res.x_hat.iter().map(|v| v.abs() > SUPPORT_THRESHOLD).collect();
    let truth: Vec<bool> = x0.iter().map(|&v| v != 0.0).collect();
    let hits = est.iter().zip(&truth).filter(|(e, t)| **e && **t).count() as f64;
    let ratio = |num: f64, den: usize| if den == 0 { 1.0 } else { num / den as f64 };
    Ok(TrialSummary {
        trial_index,
        mse,
        objective: res.objective,
        converged: res.converged,
        iterations: res.iterations,
        support_precision: ratio(hits, est.iter().filter(|&&e| e).count()),
        support_recall: ratio(hits, truth.iter().filter(|&&t| t).count()),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// All trials in index order, decoded on the current rayon pool.
pub fn run_trials(spec: &EnsembleSpec, cfg: &DecoderConfig) -> Result<Vec<TrialSummary>> {
    spec.validate()?;
    cfg.validate()?;
    (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(spec, t, cfg))
        .collect()
}

/// Summary statistics of `trials`, folded in the order given.
pub fn aggregate(trials: &[TrialSummary], success_tol: f64, replica_mse: Option<f64>) -> Aggregate {
    let mut errors: Vec<f64> = trials.iter().filter(|t| t.converged).map(|t| t.mse).collect();
    let k = errors.len();
    let mean = errors.iter().sum::<f64>() / k as f64;
    let std_error = if k >= 2 {
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    } else {
        f64::NAN
    };
    let successes = errors.iter().filter(|&&e| e <= success_tol).count();
    errors.sort_by(f64::total_cmp);
    let median = match k {
        0 => f64::NAN,
        _ if k % 2 == 1 => errors[k / 2],
        _ => 0.5 * (errors[k / 2 - 1] + errors[k / 2]),
    };
    Aggregate {
        trials: trials.len(),
        non_converged: trials.len() - k,
        mean_mse: mean,
        std_error,
        median_mse: median,
        success_fraction: if trials.is_empty() { 0.0 } else { successes as f64 / trials.len() as f64 },
        success_tol,
        replica_mse,
    }
}

/// Runs every trial of `spec` and compares with the replica prediction.
pub fn run_monte_carlo(spec: &EnsembleSpec, cfg: &DecoderConfig, success_tol: f64) -> Result<Aggregate> {
    let trials = run_trials(spec, cfg)?;
    let replica = solve_mse_fixed_point(&spec.params, &SolverConfig::default())
        .ok()
        .map(|o| o.mse());
    Ok(aggregate(&trials, success_tol, replica))
}
