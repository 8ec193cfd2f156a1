//! C interface. Channels and superchannels are opaque heap handles released
//! with their `_free` function; every fallible call returns a [`ChcStatus`]
//! and leaves a message for [`chc_last_error_message`].
//!
//! Complex buffers are interleaved `re, im` doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chancoh::channel::example_channels;
use chancoh::harness::{random_channel, random_incoherent_channel, reproduce_counterexample};
use chancoh::io;
use chancoh::measures::{Measure, SolverOptions};
use chancoh::{ComplexMatrix, Error, QuantumChannel, Superchannel};
use num_complex::Complex64;

/// Opaque channel handle.
pub struct ChcChannel {
    inner: QuantumChannel,
}

/// Opaque superchannel handle.
pub struct ChcSuperchannel {
    inner: Superchannel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The object is not a channel / superchannel, or dimensions disagree.
    InvalidObject = 3,
    Parse = 4,
    /// The solver hit its iteration cap; outputs hold the best value found.
    NotConverged = 5,
    Unsupported = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChcMeasure {
    L1 = 0,
    RelativeEntropy = 1,
    TraceDistance = 2,
    ModifiedTraceDistance = 3,
}

impl From<ChcMeasure> for Measure {
    fn from(m: ChcMeasure) -> Self {
        match m {
            ChcMeasure::L1 => Measure::L1,
            ChcMeasure::RelativeEntropy => Measure::RelativeEntropy,
            ChcMeasure::TraceDistance => Measure::TraceDistance,
            ChcMeasure::ModifiedTraceDistance => Measure::ModifiedTraceDistance,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChcExample {
    Phi1 = 0,
    Phi2 = 1,
    PhiMix = 2,
    /// Trace-preserving incoherent reference channel.
    Phi0 = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChcSolverOptions {
    pub max_iterations: usize,
    pub step_scale: f64,
    pub tolerance: f64,
    pub stall_window: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl From<SolverOptions> for ChcSolverOptions {
    fn from(o: SolverOptions) -> Self {
        Self {
            max_iterations: o.max_iterations,
            step_scale: o.step_scale,
            tolerance: o.tolerance,
            stall_window: o.stall_window,
            restarts: o.restarts,
            seed: o.seed,
        }
    }
}

impl From<ChcSolverOptions> for SolverOptions {
    fn from(o: ChcSolverOptions) -> Self {
        Self {
            max_iterations: o.max_iterations,
            step_scale: o.step_scale,
            tolerance: o.tolerance,
            stall_window: o.stall_window,
            restarts: o.restarts,
            seed: o.seed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChcMeasureResult {
    pub value: f64,
    /// `-INFINITY` when no certificate is available.
    pub lower_bound: f64,
    /// NaN unless the modified trace measure was evaluated.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChcCounterexample {
    pub ctr_phi1: f64,
    pub ctr_phi2: f64,
    pub additive_rhs: f64,
    pub ctr_mix_upper: f64,
    pub ctr_mix_solved: f64,
    pub gap: f64,
    pub violated: bool,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(ChcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Json(_) => ChcStatus::Parse,
            Error::Io(_)
            | Error::InvalidInput(_)
            | Error::UnknownMeasure(_)
            | Error::UnknownCondition(_)
            | Error::InfeasibleIsometry { .. } => ChcStatus::InvalidArgument,
            Error::UnsupportedDimension(_) => ChcStatus::Unsupported,
            _ => ChcStatus::InvalidObject,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ChcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<ChcStatus, Failure>) -> ChcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == ChcStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal error");
            ChcStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(ChcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn read_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<ChcStatus, Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(ChcStatus::Ok)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn chc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn chc_solver_options_default() -> ChcSolverOptions {
    SolverOptions::default().into()
}

/// Builds a channel from `count` Kraus operators of shape `dim_out x dim_in`
/// stored back to back in `kraus` (`2 * count * dim_out * dim_in` doubles).
///
/// # Safety
/// `kraus` must point to that many doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_from_kraus(
    dim_in: usize,
    dim_out: usize,
    count: usize,
    kraus: *const f64,
    out: *mut *mut ChcChannel,
) -> ChcStatus {
    guard(|| {
        if kraus.is_null() {
            return Err(null("kraus"));
        }
        let size = dim_in * dim_out;
        let values = std::slice::from_raw_parts(kraus, 2 * count * size);
        let ops = (0..count)
            .map(|k| {
                let data = values[2 * k * size..2 * (k + 1) * size]
                    .chunks_exact(2)
                    .map(|z| Complex64::new(z[0], z[1]))
                    .collect();
                ComplexMatrix::new(dim_out, dim_in, data)
            })
            .collect::<chancoh::Result<Vec<_>>>()?;
        store(out, ChcChannel { inner: QuantumChannel::from_kraus(ops)? })
    })
}

/// Parses a channel JSON document (Kraus or Choi form).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_from_json(json: *const c_char, out: *mut *mut ChcChannel) -> ChcStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        store(out, ChcChannel { inner: io::parse_channel(text)? })
    })
}

/// Serializes a channel to JSON. Release the string with [`chc_string_free`].
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_to_json(channel: *const ChcChannel, out: *mut *mut c_char) -> ChcStatus {
    guard(|| {
        let channel = read_ref(channel, "channel")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = serde_json::to_string(&io::channel_to_json(&channel.inner)).map_err(Error::from)?;
        *out = CString::new(text).map_err(|e| Failure(ChcStatus::Internal, e.to_string()))?.into_raw();
        Ok(ChcStatus::Ok)
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn chc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `channel` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_free(channel: *mut ChcChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// # Safety
/// `channel` must be a live handle; the output pointers writable or null.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_dims(
    channel: *const ChcChannel,
    dim_in: *mut usize,
    dim_out: *mut usize,
) -> ChcStatus {
    guard(|| {
        let channel = read_ref(channel, "channel")?;
        if let Some(d) = dim_in.as_mut() {
            *d = channel.inner.dim_in();
        }
        if let Some(d) = dim_out.as_mut() {
            *d = channel.inner.dim_out();
        }
        Ok(ChcStatus::Ok)
    })
}

/// Copies the Choi matrix into `buffer`, which must hold
/// `2 * (dim_in * dim_out)^2` doubles (`len` is checked).
///
/// # Safety
/// `channel` must be a live handle and `buffer` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chc_channel_choi(channel: *const ChcChannel, buffer: *mut f64, len: usize) -> ChcStatus {
    guard(|| {
        let channel = read_ref(channel, "channel")?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let choi = channel.inner.choi_matrix();
        let needed = 2 * choi.rows() * choi.cols();
        if len < needed {
            return Err(Failure(ChcStatus::InvalidArgument, format!("buffer holds {len} doubles, need {needed}")));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, needed);
        for (pair, z) in dst.chunks_exact_mut(2).zip(choi.as_slice()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(ChcStatus::Ok)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chc_example_channel(which: ChcExample, out: *mut *mut ChcChannel) -> ChcStatus {
    guard(|| {
        let ex = example_channels();
        let inner = match which {
            ChcExample::Phi1 => ex.phi1,
            ChcExample::Phi2 => ex.phi2,
            ChcExample::PhiMix => ex.phi_mix,
            ChcExample::Phi0 => ex.phi0,
        };
        store(out, ChcChannel { inner })
    })
}

/// Random channel (`incoherent = false`, `kraus_count` operators) or random
/// incoherent channel; deterministic in `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chc_random_channel(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    incoherent: bool,
    seed: u64,
    out: *mut *mut ChcChannel,
) -> ChcStatus {
    guard(|| {
        let inner = if incoherent {
            random_incoherent_channel(dim_in, dim_out, seed)?
        } else {
            random_channel(dim_in, dim_out, kraus_count, seed)?
        };
        store(out, ChcChannel { inner })
    })
}

/// Evaluates `measure`; `options` may be null for the defaults. Returns
/// `NotConverged` (with `out` filled) when the solver hit its cap.
///
/// # Safety
/// `channel` must be a live handle, `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_measure(
    channel: *const ChcChannel,
    measure: ChcMeasure,
    options: *const ChcSolverOptions,
    out: *mut ChcMeasureResult,
) -> ChcStatus {
    guard(|| {
        let channel = read_ref(channel, "channel")?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let opts = options.as_ref().map_or_else(SolverOptions::default, |o| (*o).into());
        let r = Measure::from(measure).evaluate(&channel.inner, &opts);
        *out = ChcMeasureResult {
            value: r.value,
            lower_bound: r.lower_bound,
            lambda: r.lambda.unwrap_or(f64::NAN),
            iterations: r.iterations,
            converged: r.converged,
        };
        if r.converged {
            Ok(ChcStatus::Ok)
        } else {
            Err(Failure(ChcStatus::NotConverged, "solver stopped at the iteration cap".into()))
        }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_superchannel_from_json(json: *const c_char, out: *mut *mut ChcSuperchannel) -> ChcStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        store(out, ChcSuperchannel { inner: io::parse_superchannel(text)? })
    })
}

/// # Safety
/// `theta` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn chc_superchannel_free(theta: *mut ChcSuperchannel) {
    if !theta.is_null() {
        drop(Box::from_raw(theta));
    }
}

/// Applies `theta` to `channel`; fails with `InvalidObject` if the result is
/// not a channel.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_superchannel_apply(
    theta: *const ChcSuperchannel,
    channel: *const ChcChannel,
    out: *mut *mut ChcChannel,
) -> ChcStatus {
    guard(|| {
        let theta = read_ref(theta, "superchannel")?;
        let channel = read_ref(channel, "channel")?;
        store(out, ChcChannel { inner: theta.inner.apply(&channel.inner)? })
    })
}

/// # Safety
/// `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chc_counterexample(
    options: *const ChcSolverOptions,
    out: *mut ChcCounterexample,
) -> ChcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let opts = options.as_ref().map_or_else(SolverOptions::default, |o| (*o).into());
        let r = reproduce_counterexample(&opts)?;
        *out = ChcCounterexample {
            ctr_phi1: r.ctr_phi1,
            ctr_phi2: r.ctr_phi2,
            additive_rhs: r.additive_rhs,
            ctr_mix_upper: r.ctr_mix_upper,
            ctr_mix_solved: r.ctr_mix_solved,
            gap: r.gap,
            violated: r.violated,
            converged: r.converged,
        };
        Ok(ChcStatus::Ok)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_handles_are_reported() {
        let mut r = ChcMeasureResult { value: 0.0, lower_bound: 0.0, lambda: 0.0, iterations: 0, converged: false };
        let status = unsafe { chc_measure(ptr::null(), ChcMeasure::L1, ptr::null(), &mut r) };
        assert_eq!(status, ChcStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(chc_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("channel"));
    }

    #[test]
    fn default_options_round_trip() {
        let o = chc_solver_options_default();
        assert_eq!(SolverOptions::from(o), SolverOptions::default());
    }
}
