//! Spectral norm by power iteration on `A^T A`.

use nalgebra::{DMatrix, DVector};

/// Largest singular value of `a`. Returns 0 for a zero matrix.
///
/// Uses the Rayleigh quotient `||A v||^2` with `v <- A^T A v / ||.||`,
/// stopping when the estimate changes by less than `tol` relative.
pub fn estimate_operator_norm(a: &DMatrix<f64>, max_iters: usize, tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // Deterministic start with no special alignment to coordinate axes.
    let mut v = DVector::from_fn(n, |j, _| 1.0 + ((j as f64 + 1.0) * 0.618_033_988_749_894_9).fract());
    v /= v.norm();
    let mut av = DVector::zeros(a.nrows());
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        av.gemv(1.0, a, &v, 0.0);
        let next = av.norm_squared();
        if next == 0.0 {
            return 0.0;
        }
        v.gemv_tr(1.0, a, &av, 0.0);
        let norm = v.norm();
        if norm == 0.0 {
            return next.sqrt();
        }
        v /= norm;
        let done = (next - estimate).abs() <= tol * next;
        estimate = next;
        if done {
            break;
        }
    }
    estimate.sqrt()
}
