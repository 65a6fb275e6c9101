//! Critical compression ratio across signal densities, with the noise
//! density tied to the signal density by a fixed ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replica::{find_critical_alpha, optimize_lambda, LambdaObjective, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaMode {
    /// Only `lambda = 1`.
    Unit,
    /// `lambda = 1` and the ratio-minimizing `lambda`.
    UnitAndOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub rho_x: f64,
    /// Noise density over signal density.
    pub delta: f64,
    pub alpha_c_unit: f64,
    pub alpha_c_optimal: Option<f64>,
    pub lambda_optimal: Option<f64>,
}

/// One row per `(delta, rho_x)`, deltas outermost, in input order.
pub fn sweep_phase_diagram(
    rho_x_grid: &[f64],
    deltas: &[f64],
    mode: LambdaMode,
    cfg: &SolverConfig,
) -> Result<Vec<PhaseRow>> {
    if rho_x_grid.is_empty() || deltas.is_empty() {
        return Err(Error::InvalidParams("phase diagram needs a nonempty grid".into()));
    }
    let points: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| rho_x_grid.iter().map(move |&r| (d, r)))
        .collect();
    points
        .into_par_iter()
        .map(|(delta, rho_x)| phase_row(rho_x, delta, mode, cfg))
        .collect()
}

fn phase_row(rho_x: f64, delta: f64, mode: LambdaMode, cfg: &SolverConfig) -> Result<PhaseRow> {
    let rho_w = delta * rho_x;
    let alpha_c_unit = find_critical_alpha(1.0, rho_x, rho_w, cfg)?;
    let (alpha_c_optimal, lambda_optimal) = match mode {
        LambdaMode::Unit => (None, None),
        LambdaMode::UnitAndOptimal => {
            let opt = optimize_lambda(&LambdaObjective::CriticalAlpha { rho_x, rho_w }, cfg)?;
            (Some(opt.value), Some(opt.lambda))
        }
    };
    Ok(PhaseRow {
        rho_x,
        delta,
        alpha_c_unit,
        alpha_c_optimal,
        lambda_optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replica::find_critical_rho_x;

    #[test]
    fn small_density_tail() {
        // Regression values from the threshold solver; each is checked by
        // inverting back to the density it came from.
        let cfg = SolverConfig::default();
        let grid = [0.005, 0.01, 0.02, 0.04];
        let rows = sweep_phase_diagram(&grid, &[0.1], LambdaMode::Unit, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for row in rows.iter().rev() {
            assert!(row.alpha_c_unit > 0.0 && row.alpha_c_unit < prev, "{row:?}");
            prev = row.alpha_c_unit;
            let back = find_critical_rho_x(row.alpha_c_unit, 1.0, 0.1 * row.rho_x, &cfg).unwrap();
            assert!((back - row.rho_x).abs() <= 1e-5, "{row:?} -> {back}");
        }
    }

    #[test]
    fn optimal_never_worse_and_duplicates_agree() {
        let cfg = SolverConfig::default();
        let rows = sweep_phase_diagram(&[0.1, 0.1], &[0.2], LambdaMode::UnitAndOptimal, &cfg).unwrap();
        assert_eq!(rows[0], rows[1]);
        assert!(rows[0].alpha_c_optimal.unwrap() <= rows[0].alpha_c_unit + 1e-6);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(sweep_phase_diagram(&[], &[0.1], LambdaMode::Unit, &SolverConfig::default()).is_err());
    }
}
