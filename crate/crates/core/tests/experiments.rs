use proptest::prelude::*;
use sparse_lab::decoder::DecoderConfig;
use sparse_lab::experiments::{aggregate, run_monte_carlo, run_trials, EnsembleSpec, TrialSummary};
use sparse_lab::replica::SystemParams;

fn summary(i: u64, mse: f64, converged: bool) -> TrialSummary {
    TrialSummary {
        trial_index: i,
        mse,
        objective: 0.0,
        converged,
        iterations: 1,
        support_precision: 1.0,
        support_recall: 1.0,
        wall_time_s: 0.0,
    }
}

proptest! {
    #[test]
    fn aggregate_statistics_stay_in_range(
        trials in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..60),
        tol in 1e-8f64..0.5,
    ) {
        let rows: Vec<_> = trials.iter().enumerate().map(|(i, &(m, c))| summary(i as u64, m, c)).collect();
        let agg = aggregate(&rows, tol, None);
        prop_assert_eq!(agg.trials, rows.len());
        prop_assert!((0.0..=1.0).contains(&agg.success_fraction));
        let converged: Vec<f64> = rows.iter().filter(|r| r.converged).map(|r| r.mse).collect();
        prop_assert_eq!(agg.non_converged, rows.len() - converged.len());
        if converged.len() >= 2 {
            prop_assert!(agg.std_error >= 0.0);
            let lo = converged.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = converged.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(agg.mean_mse >= lo - 1e-15 && agg.mean_mse <= hi + 1e-15);
            prop_assert!(agg.median_mse >= lo && agg.median_mse <= hi);
        }
    }
}

fn small_spec(seed: u64) -> EnsembleSpec {
    EnsembleSpec {
        n: 64,
        params: SystemParams::new(0.5, 1.0, 0.15, 0.1, 1.0, 1.0).unwrap(),
        trials: 6,
        base_seed: seed,
    }
}

#[test]
fn aggregate_is_a_function_of_its_inputs() {
    let cfg = DecoderConfig::default();
    let a = run_monte_carlo(&small_spec(5), &cfg, 1e-6).unwrap();
    let b = run_monte_carlo(&small_spec(5), &cfg, 1e-6).unwrap();
    assert_eq!(a.mean_mse.to_bits(), b.mean_mse.to_bits());
    assert_eq!(a.success_fraction, b.success_fraction);
    let c = run_monte_carlo(&small_spec(6), &cfg, 1e-6).unwrap();
    assert_ne!(a.mean_mse, c.mean_mse);
}

#[test]
fn trials_do_not_depend_on_their_neighbours() {
    let cfg = DecoderConfig::default();
    let full = run_trials(&small_spec(8), &cfg).unwrap();
    let short = run_trials(&EnsembleSpec { trials: 3, ..small_spec(8) }, &cfg).unwrap();
    for (x, y) in full.iter().zip(&short) {
        assert_eq!(x.mse.to_bits(), y.mse.to_bits());
    }
}

#[test]
fn prediction_is_attached() {
    let agg = run_monte_carlo(&EnsembleSpec { trials: 2, ..small_spec(1) }, &DecoderConfig::default(), 1e-6).unwrap();
    assert!((agg.replica_mse.unwrap() - 0.0461352).abs() <= 1e-6);
}
