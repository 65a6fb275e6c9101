//! Brute-force minimizers for tiny instances, used to check [`decode`].
//!
//! [`decode`]: super::decode

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::{objective_unchecked, ProblemInstance};

/// Largest signal dimension the oracles accept.
pub const MAX_ORACLE_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOracleConfig {
    /// Cells per axis of the starting grid.
    pub initial_cells: usize,
    /// Stop once the best value is certified to within this of the minimum.
    pub gap_tol: f64,
    /// Give up when more cells than this survive a level.
    pub max_cells: usize,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        Self {
            initial_cells: 16,
            gap_tol: 1e-9,
            max_cells: 4_000_000,
        }
    }
}

fn check_size(instance: &ProblemInstance) -> Result<()> {
    if instance.n() > MAX_ORACLE_N {
        return Err(Error::Dimension(format!(
            "oracles handle at most {MAX_ORACLE_N} unknowns, got {}",
            instance.n()
        )));
    }
    Ok(())
}

/// Exact minimizer by vertex enumeration.
///
/// The objective is convex and piecewise linear with kinks on the
/// hyperplanes `x_j = 0` and `a_i^T x = y_i`. The coordinate planes make
/// every cell pointed, so a minimizer sits where `N` independent kink
/// planes meet. All such intersections are solved for and compared.
pub fn vertex_oracle(instance: &ProblemInstance, lambda: f64) -> Result<(DVector<f64>, f64)> {
    check_size(instance)?;
    let (m, n) = (instance.m(), instance.n());
    let a = instance.a();
    // Plane k: normal row and offset.
    let planes: Vec<(DVector<f64>, f64)> = (0..n)
        .map(|j| (DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 }), 0.0))
        .chain((0..m).map(|i| (a.row(i).transpose(), instance.y()[i])))
        .collect();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for subset in (0..planes.len()).combinations(n) {
        let mat = DMatrix::from_fn(n, n, |r, c| planes[subset[r]].0[c]);
        let rhs = DVector::from_fn(n, |r, _| planes[subset[r]].1);
        let Some(x) = mat.lu().solve(&rhs) else { continue };
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let f = objective_unchecked(instance, &x, lambda);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    best.ok_or_else(|| Error::Dimension("no vertex found".into()))
}

/// Minimizer by grid search with certified pruning.
///
/// Every minimizer lies in the box `||x||_inf <= ||y||_1 / lambda`, since
/// `lambda ||x||_1 <= f(x) <= f(0)`. The box is cut into a regular grid of
/// cells, each cell is scored at its centre, and a cell is dropped once the
/// convexity bound `f(c) - r ||g||_1` (any subgradient `g` at the centre,
/// cell half-width `r`) exceeds the best value seen. Surviving cells are
/// halved along every axis until the best value and the smallest surviving
/// bound are within `gap_tol`. The result is that of an exhaustive search
/// over the finest grid, without visiting the cells that cannot win.
pub fn grid_oracle(instance: &ProblemInstance, lambda: f64, cfg: &GridOracleConfig) -> Result<(DVector<f64>, f64)> {
    check_size(instance)?;
    if cfg.initial_cells == 0 || !(cfg.gap_tol > 0.0) {
        return Err(Error::InvalidParams("grid oracle needs cells >= 1 and a positive gap".into()));
    }
    let (m, n) = (instance.m(), instance.n());
    let rows: Vec<f64> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| instance.a()[(i, j)]).collect();
    let y = instance.y().as_slice();
    // Objective and convexity lower bound over a cell of half-width `r`.
    let score = |c: &[f64], r: f64| -> (f64, f64) {
        let mut f = 0.0;
        let mut g = [0.0f64; MAX_ORACLE_N];
        for i in 0..m {
            let row = &rows[i * n..(i + 1) * n];
            let resid = y[i] - row.iter().zip(c).map(|(a, x)| a * x).sum::<f64>();
            f += resid.abs();
            let s = if resid > 0.0 { 1.0 } else if resid < 0.0 { -1.0 } else { 0.0 };
            for j in 0..n {
                g[j] -= s * row[j];
            }
        }
        let mut g1 = 0.0;
        for j in 0..n {
            f += lambda * c[j].abs();
            let s = if c[j] > 0.0 { 1.0 } else if c[j] < 0.0 { -1.0 } else { 0.0 };
            g1 += (g[j] + lambda * s).abs();
        }
        (f, f - r * g1)
    };

    let half_width = instance.y().lp_norm(1) / lambda;
    let k = cfg.initial_cells;
    let mut r = half_width / k as f64;
    let mut centres: Vec<f64> = Vec::new();
    let mut bounds: Vec<f64> = Vec::new();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let consider = |c: &[f64], r: f64, centres: &mut Vec<f64>, bounds: &mut Vec<f64>, best: &mut (f64, Vec<f64>)| {
        let (f, lb) = score(c, r);
        if f < best.0 {
            *best = (f, c.to_vec());
        }
        if lb <= best.0 {
            centres.extend_from_slice(c);
            bounds.push(lb);
        }
    };
    let mut c = vec![0.0; n];
    for flat in 0..k.pow(n as u32) {
        let mut rem = flat;
        for cj in c.iter_mut() {
            *cj = -half_width + r * (2 * (rem % k) + 1) as f64;
            rem /= k;
        }
        consider(&c, r, &mut centres, &mut bounds, &mut best);
    }
    loop {
        let lower = bounds.iter().copied().fold(f64::INFINITY, f64::min);
        if best.0 - lower <= cfg.gap_tol {
            break;
        }
        if bounds.len() > cfg.max_cells {
            return Err(Error::InvalidParams(format!(
                "grid oracle: {} cells survive at half-width {r:e}",
                bounds.len()
            )));
        }
        let (old_c, old_b) = (std::mem::take(&mut centres), std::mem::take(&mut bounds));
        r *= 0.5;
        for (parent, &lb) in old_c.chunks(n).zip(&old_b) {
            if lb > best.0 {
                continue;
            }
            for corner in 0..1usize << n {
                for j in 0..n {
                    c[j] = parent[j] + if corner >> j & 1 == 1 { r } else { -r };
                }
                consider(&c, r, &mut centres, &mut bounds, &mut best);
            }
        }
    }
    Ok((DVector::from_vec(best.1), best.0))
}
