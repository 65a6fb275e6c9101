//! Error type shared by all solvers in the crate.

use thiserror::Error;

use crate::replica::{FixedPointState, ThresholdState};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    /// Fixed-point iteration of the mean-square-error equations ran out of
    /// sweeps without converging or showing the perfect-phase signature.
    #[error("mse fixed point did not converge after {} sweeps (residual {:e})", .last.iterations, .last.residual)]
    MseNoConvergence { last: Box<FixedPointState> },

    /// A sweep produced a non-finite conjugate parameter.
    #[error("mse iteration diverged (non-finite m_hat)")]
    MseDivergence { last: Box<FixedPointState> },

    #[error("threshold fixed point did not converge after {} sweeps (residual {:e})", .last.iterations, .last.residual)]
    ThresholdNoConvergence { last: Box<ThresholdState> },

    /// The success-condition residual has no sign change in the search
    /// bracket. `residual_sign` is the common sign at both ends.
    #[error("no phase boundary in range [{lo}, {hi}] (residual sign {residual_sign})")]
    NoPhaseBoundary { lo: f64, hi: f64, residual_sign: f64 },

    #[error("objective evaluation failed at lambda = {lambda}: {source}")]
    Probe {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("measurement matrix is zero")]
    ZeroMatrix,
}
