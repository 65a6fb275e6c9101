//! C interface to the replica solvers and the l1-l1 decoder.
//!
//! Every fallible function returns an [`SlStatus`] and writes its results
//! through out-pointers, which are left untouched on failure. Problem
//! instances and decode results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Panics never cross the
//! boundary; they surface as `SL_STATUS_INTERNAL`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{DMatrix, DVector};
use sparse_lab::decoder::{decode, DecodeResult, DecoderConfig, ProblemInstance};
use sparse_lab::replica::{
    find_critical_alpha, find_critical_rho_x, optimize_lambda, solve_mse_fixed_point, LambdaObjective, MseOutcome,
    SolverConfig, SystemParams,
};
use sparse_lab::special_fns::{q_function, r_lambda, s_func};
use sparse_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NoPhaseBoundary = 4,
    NotConverged = 5,
    Internal = 6,
}

impl From<&Error> for SlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain { .. } | Error::InvalidParams(_) | Error::ZeroMatrix => SlStatus::InvalidArgument,
            Error::Dimension(_) => SlStatus::DimensionMismatch,
            Error::NoPhaseBoundary { .. } => SlStatus::NoPhaseBoundary,
            Error::Probe { source, .. } => SlStatus::from(source.as_ref()),
            Error::Quadrature { .. }
            | Error::MseNoConvergence { .. }
            | Error::MseDivergence { .. }
            | Error::ThresholdNoConvergence { .. } => SlStatus::NotConverged,
        }
    }
}

/// Parameters of one problem ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlSystemParams {
    pub alpha: f64,
    pub lambda: f64,
    pub rho_x: f64,
    pub rho_w: f64,
    pub sigma2_x: f64,
    pub sigma2_w: f64,
}

/// Opaque problem instance.
pub struct SlInstance(ProblemInstance);

/// Opaque decoder output.
pub struct SlDecodeResult(DecodeResult);

fn guard<F: FnOnce() -> Result<(), SlStatus>>(f: F) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => SlStatus::Internal,
    }
}

fn lift<T>(r: sparse_lab::Result<T>) -> Result<T, SlStatus> {
    r.map_err(|e| SlStatus::from(&e))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SlStatus> {
    if out.is_null() {
        return Err(SlStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn sl_status_message(status: SlStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SlStatus::Ok => b"ok\0",
        SlStatus::NullPointer => b"null pointer argument\0",
        SlStatus::InvalidArgument => b"argument out of range\0",
        SlStatus::DimensionMismatch => b"dimension mismatch\0",
        SlStatus::NoPhaseBoundary => b"no phase boundary in the search range\0",
        SlStatus::NotConverged => b"iteration did not converge\0",
        SlStatus::Internal => b"internal error\0",
    };
    s.as_ptr().cast()
}

/// Gaussian tail probability `P(Z > x)`.
#[no_mangle]
pub extern "C" fn sl_q_function(x: f64) -> f64 {
    q_function(x)
}

/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn sl_s_func(x: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, lift(s_func(x))?))
}

/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn sl_r_lambda(lambda: f64, h: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, lift(r_lambda(lambda, h))?))
}

/// Largest signal density with perfect recovery.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn sl_critical_rho_x(alpha: f64, lambda: f64, rho_w: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, lift(find_critical_rho_x(alpha, lambda, rho_w, &SolverConfig::default()))?))
}

/// Smallest compression ratio with perfect recovery.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn sl_critical_alpha(lambda: f64, rho_x: f64, rho_w: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, lift(find_critical_alpha(lambda, rho_x, rho_w, &SolverConfig::default()))?))
}

/// Regularization weight maximizing the critical signal density.
///
/// # Safety
/// Both out-pointers must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn sl_optimize_lambda(
    alpha: f64,
    rho_w: f64,
    lambda_out: *mut f64,
    rho_x_out: *mut f64,
) -> SlStatus {
    guard(|| {
        if lambda_out.is_null() || rho_x_out.is_null() {
            return Err(SlStatus::NullPointer);
        }
        let opt = lift(optimize_lambda(&LambdaObjective::CriticalRhoX { alpha, rho_w }, &SolverConfig::default()))?;
        write(lambda_out, opt.lambda)?;
        write(rho_x_out, opt.value)
    })
}

/// Predicted per-component mse. `perfect_out` receives 1 in the perfect
/// phase (where the mse is 0) and 0 otherwise.
///
/// # Safety
/// `params` must point to a valid `SlSystemParams`; the out-pointers must
/// be null or valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn sl_predicted_mse(
    params: *const SlSystemParams,
    mse_out: *mut f64,
    perfect_out: *mut i32,
) -> SlStatus {
    guard(|| {
        if params.is_null() || mse_out.is_null() || perfect_out.is_null() {
            return Err(SlStatus::NullPointer);
        }
        let p = &*params;
        let sp = lift(SystemParams::new(p.alpha, p.lambda, p.rho_x, p.rho_w, p.sigma2_x, p.sigma2_w))?;
        let outcome = lift(solve_mse_fixed_point(&sp, &SolverConfig::default()))?;
        write(mse_out, outcome.mse())?;
        write(perfect_out, matches!(outcome, MseOutcome::Perfect(_)) as i32)
    })
}

/// Builds an instance from an `m x n` column-major matrix and `m`
/// observations.
///
/// # Safety
/// `a` must point to `m * n` doubles, `y` to `m` doubles, and `out` must be
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sl_instance_new(
    m: usize,
    n: usize,
    a: *const f64,
    y: *const f64,
    out: *mut *mut SlInstance,
) -> SlStatus {
    guard(|| {
        if a.is_null() || y.is_null() || out.is_null() {
            return Err(SlStatus::NullPointer);
        }
        let len = m.checked_mul(n).ok_or(SlStatus::DimensionMismatch)?;
        if len == 0 {
            return Err(SlStatus::DimensionMismatch);
        }
        let a = DMatrix::from_column_slice(m, n, std::slice::from_raw_parts(a, len));
        let y = DVector::from_column_slice(std::slice::from_raw_parts(y, m));
        let inst = lift(ProblemInstance::new(a, y))?;
        write(out, Box::into_raw(Box::new(SlInstance(inst))))
    })
}

/// # Safety
/// `inst` must be null or a handle from `sl_instance_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_instance_free(inst: *mut SlInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Decodes with the default configuration and an iteration cap
/// (`max_iters = 0` keeps the default).
///
/// # Safety
/// `inst` must be a live instance handle and `out` valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn sl_decode(
    inst: *const SlInstance,
    lambda: f64,
    max_iters: usize,
    out: *mut *mut SlDecodeResult,
) -> SlStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return Err(SlStatus::NullPointer);
        }
        let mut cfg = DecoderConfig::default();
        if max_iters > 0 {
            cfg.max_iters = max_iters;
        }
        let res = lift(decode(&(*inst).0, lambda, &cfg))?;
        write(out, Box::into_raw(Box::new(SlDecodeResult(res))))
    })
}

/// Objective value at the estimate, or NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_objective(res: *const SlDecodeResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.0.objective)
}

/// 1 if the estimate carries an optimality certificate, else 0.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_converged(res: *const SlDecodeResult) -> i32 {
    res.as_ref().is_some_and(|r| r.0.converged) as i32
}

/// Length of the estimate.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_len(res: *const SlDecodeResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.x_hat.len())
}

/// Copies the estimate into `buf`, which must hold `len` doubles with
/// `len` equal to `sl_result_len`.
///
/// # Safety
/// `res` must be a live result handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sl_result_x_hat(res: *const SlDecodeResult, buf: *mut f64, len: usize) -> SlStatus {
    guard(|| {
        let r = res.as_ref().ok_or(SlStatus::NullPointer)?;
        if buf.is_null() {
            return Err(SlStatus::NullPointer);
        }
        if len != r.0.x_hat.len() {
            return Err(SlStatus::DimensionMismatch);
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(r.0.x_hat.as_slice());
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle from `sl_decode` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_result_free(res: *mut SlDecodeResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_messages_are_terminated() {
        for s in [SlStatus::Ok, SlStatus::NoPhaseBoundary, SlStatus::Internal] {
            let msg = unsafe { CStr::from_ptr(sl_status_message(s)) };
            assert!(!msg.to_bytes().is_empty());
        }
    }

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(SlStatus::from(&Error::ZeroMatrix), SlStatus::InvalidArgument);
        let nested = Error::Probe {
            lambda: 1.0,
            source: Box::new(Error::NoPhaseBoundary { lo: 0.0, hi: 1.0, residual_sign: 1.0 }),
        };
        assert_eq!(SlStatus::from(&nested), SlStatus::NoPhaseBoundary);
    }

    #[test]
    fn null_outputs_are_rejected() {
        unsafe {
            assert_eq!(sl_s_func(1.0, std::ptr::null_mut()), SlStatus::NullPointer);
            assert!(sl_result_objective(std::ptr::null()).is_nan());
            sl_result_free(std::ptr::null_mut());
            sl_instance_free(std::ptr::null_mut());
        }
    }
}
