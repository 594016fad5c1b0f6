//! C interface to the coded convolution library and the episode simulator.
//!
//! Every function returns a [`CcStatus`]. On failure a human-readable message
//! is available from [`cc_last_error_message`] on the same thread. Objects
//! are opaque handles created by `*_new`/`*_preset` and released by `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use codeconv::coding::{convolve, encode_row, mds_decode, EncodingMatrix};
use codeconv::engine::run_episode;
use codeconv::experiments::VERSION;
use codeconv::scenario::{ScenarioConfig, StragglerMode};
use codeconv::strategies::StrategyKind;
use codeconv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    InvalidArgument = 1,
    InsufficientResults = 2,
    DecodeFailure = 3,
    NotReady = 4,
    Config = 5,
    Io = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStrategy {
    Uncoded = 0,
    Coded = 1,
    Dynamic = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStragglerMode {
    /// `param` is the slowdown factor.
    Delayed = 0,
    /// `param` is the failure time in seconds.
    Fail = 1,
    /// `param` is the departure time in seconds.
    Leave = 2,
}

/// Summary of one simulated episode.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CcEpisodeSummary {
    pub success: bool,
    pub completion_time: f64,
    pub horizon: f64,
    pub pieces_dispatched: usize,
    pub redundancy_used: usize,
}

/// Opaque Vandermonde encoding matrix.
pub struct CcEncodingMatrix(EncodingMatrix);

/// Opaque scenario configuration.
pub struct CcScenario(ScenarioConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::InvalidArgument(_) => CcStatus::InvalidArgument,
        Error::InsufficientResults { .. } => CcStatus::InsufficientResults,
        Error::DecodeFailure(_) => CcStatus::DecodeFailure,
        Error::NotReady(_) => CcStatus::NotReady,
        Error::Config(_) => CcStatus::Config,
        Error::Io(_) => CcStatus::Io,
    }
}

/// Error raised inside a call: a library error or an interface-level status.
enum Fault {
    Lib(Error),
    Status(CcStatus, String),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fault>>(f: F) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CcStatus::Ok
        }
        Ok(Err(Fault::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fault::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fault {
    Fault::Status(CcStatus::NullPointer, format!("{what} is null"))
}

/// Borrows `len` doubles at `p`. A null pointer is only accepted for `len == 0`.
unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fault> {
    if p.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(null(what)) };
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Fault> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Fault::Status(CcStatus::BufferTooSmall, format!("{what} holds {len}, need {need}")));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    static V: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    V.get_or_init(|| CString::new(VERSION).unwrap_or_default()).as_ptr()
}

/// Full linear convolution of `a` (length `n1`) and `x` (length `n2`) into
/// `out`, which must hold at least `n1 + n2 - 1` values.
///
/// # Safety
/// `a`, `x` and `out` must point to buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn cc_convolve(
    a: *const f64,
    n1: usize,
    x: *const f64,
    n2: usize,
    out: *mut f64,
    out_len: usize,
) -> CcStatus {
    guard(|| {
        let a = input(a, n1, "a")?;
        let x = input(x, n2, "x")?;
        let y = convolve(a, x)?;
        output(out, out_len, y.len(), "out")?.copy_from_slice(&y);
        Ok(())
    })
}

/// Creates a `rows x cols` Vandermonde encoding matrix.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cc_encoding_matrix_new(rows: usize, cols: usize, out: *mut *mut CcEncodingMatrix) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = EncodingMatrix::chebyshev(rows, cols)?;
        *out = Box::into_raw(Box::new(CcEncodingMatrix(m)));
        Ok(())
    })
}

/// Releases a matrix; null is ignored.
///
/// # Safety
/// `m` must come from [`cc_encoding_matrix_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_encoding_matrix_free(m: *mut CcEncodingMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Entry `(row, col)` of the matrix.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_encoding_matrix_entry(
    m: *const CcEncodingMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> CcStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if row >= m.0.rows() || col >= m.0.cols() {
            return Err(Error::InvalidArgument(format!("entry ({row}, {col}) outside the matrix")).into());
        }
        *out = m.0.entry(row, col);
        Ok(())
    })
}

/// Encodes `cols` pieces of length `piece_len`, stored back to back in
/// `pieces`, with generator row `row` into `out` (`piece_len` values).
///
/// # Safety
/// Buffers must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn cc_encode(
    m: *const CcEncodingMatrix,
    pieces: *const f64,
    piece_len: usize,
    row: usize,
    out: *mut f64,
    out_len: usize,
) -> CcStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if piece_len == 0 {
            return Err(Error::InvalidArgument("piece length must be positive".into()).into());
        }
        let data = input(pieces, m.0.cols() * piece_len, "pieces")?;
        let chunks: Vec<&[f64]> = data.chunks(piece_len).collect();
        let coded = encode_row(&chunks, &m.0, row)?;
        output(out, out_len, piece_len, "out")?.copy_from_slice(&coded);
        Ok(())
    })
}

/// Recovers the `cols` source pieces from `cols` coded results. `rows[i]` is
/// the generator row of the `i`-th result; results of length `result_len` are
/// stored back to back. The decoded pieces are written back to back to `out`.
///
/// # Safety
/// Buffers must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn cc_decode(
    m: *const CcEncodingMatrix,
    rows: *const usize,
    count: usize,
    results: *const f64,
    result_len: usize,
    out: *mut f64,
    out_len: usize,
) -> CcStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if rows.is_null() && count > 0 {
            return Err(null("rows"));
        }
        if result_len == 0 {
            return Err(Error::InvalidArgument("result length must be positive".into()).into());
        }
        let rows = if count == 0 { &[][..] } else { slice::from_raw_parts(rows, count) };
        let data = input(results, count * result_len, "results")?;
        let pairs: Vec<(usize, &[f64])> = rows.iter().copied().zip(data.chunks(result_len)).collect();
        let decoded = mds_decode(&pairs, &m.0)?;
        let dst = output(out, out_len, decoded.len() * result_len, "out")?;
        for (chunk, piece) in dst.chunks_mut(result_len).zip(&decoded) {
            chunk.copy_from_slice(piece);
        }
        Ok(())
    })
}

/// Reference scenario `index` (1 to 4) with vector lengths divided by `scale`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_preset(index: usize, scale: usize, out: *mut *mut CcScenario) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sc = ScenarioConfig::preset(index, scale)?;
        *out = Box::into_raw(Box::new(CcScenario(sc)));
        Ok(())
    })
}

/// Sets the straggler fraction and behaviour.
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_set_stragglers(
    sc: *mut CcScenario,
    ratio: f64,
    mode: CcStragglerMode,
    param: f64,
) -> CcStatus {
    guard(|| {
        let sc = sc.as_mut().ok_or_else(|| null("scenario"))?;
        let mode = match mode {
            CcStragglerMode::Delayed => StragglerMode::Delayed(param),
            CcStragglerMode::Fail => StragglerMode::Fail { at: param },
            CcStragglerMode::Leave => StragglerMode::Leave { at: param },
        };
        let next = sc.0.clone().with_stragglers(ratio, mode);
        next.validate()?;
        sc.0 = next;
        Ok(())
    })
}

/// Sets the dynamic strategy's piece length; 0 restores the default.
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_set_b(sc: *mut CcScenario, b: usize) -> CcStatus {
    guard(|| {
        let sc = sc.as_mut().ok_or_else(|| null("scenario"))?;
        let next = ScenarioConfig { b: (b > 0).then_some(b), ..sc.0.clone() };
        next.validate()?;
        sc.0 = next;
        Ok(())
    })
}

/// Releases a scenario; null is ignored.
///
/// # Safety
/// `sc` must come from [`cc_scenario_preset`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_free(sc: *mut CcScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Simulates one episode of `strategy` with `seed`.
///
/// # Safety
/// `sc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_run_episode(
    sc: *const CcScenario,
    strategy: CcStrategy,
    seed: u64,
    out: *mut CcEpisodeSummary,
) -> CcStatus {
    guard(|| {
        let sc = sc.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match strategy {
            CcStrategy::Uncoded => StrategyKind::Uncoded,
            CcStrategy::Coded => StrategyKind::Coded,
            CcStrategy::Dynamic => StrategyKind::Dynamic,
        };
        let m = run_episode(&sc.0, kind, seed)?;
        *out = CcEpisodeSummary {
            success: m.outcome.success,
            completion_time: m.outcome.completion_time,
            horizon: m.horizon,
            pieces_dispatched: m.outcome.pieces_dispatched,
            redundancy_used: m.outcome.redundancy_used,
        };
        Ok(())
    })
}
