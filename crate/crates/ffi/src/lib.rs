//! C ABI over the `uew` library.
//!
//! Operators and states are opaque heap handles released with the matching
//! `*_free` function. Every fallible call returns a [`UewStatus`]; on failure
//! the message is kept per thread and can be copied out with
//! [`uew_last_error_message`]. Outputs are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64 as C64;

use uew::analysis::{alpha_sweep, uew_pair_for, SweepAlpha};
use uew::io::{parse_operator, parse_state};
use uew::linalg::{expectation, HermitianOperator};
use uew::optimize::{sup_product_constrained, sup_product_unconstrained, OptimizerConfig};
use uew::states::{build_example31, DensityMatrix, Example31Config, NoisyStateFamily, PovmConvention};
use uew::witness::{detect, ConstraintSpec, HalfSpaceSide};
use uew::UewError;

/// Result codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UewStatus {
    Ok = 0,
    InvalidInput = 1,
    NoConvergence = 2,
    Infeasible = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Opaque Hermitian operator on a bipartite space.
pub struct UewOperator(HermitianOperator);

/// Opaque density matrix on a bipartite space.
pub struct UewState(DensityMatrix);

/// Half-space selector for [`uew_pc`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UewSide {
    Leq = 0,
    Geq = 1,
}

/// Measurement reading for the worked example builders.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UewPovm {
    Complete = 0,
    Printed = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &UewError) -> UewStatus {
    match e {
        UewError::NoConvergence(_) | UewError::InconsistentBracket(_) => UewStatus::NoConvergence,
        UewError::EmptyFeasibleSet => UewStatus::Infeasible,
        _ => UewStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Lib(UewError),
}

impl From<UewError> for Failure {
    fn from(e: UewError) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> UewStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            UewStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            UewStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            UewStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(UewError::Parse(format!("{what} is not valid UTF-8"))))
}

unsafe fn complex_entries(
    d_a: usize,
    d_b: usize,
    re: *const f64,
    im: *const f64,
) -> Result<((usize, usize), Vec<C64>), Failure> {
    if re.is_null() {
        return Err(Failure::Null("re"));
    }
    let n = d_a
        .checked_mul(d_b)
        .filter(|&n| n > 0 && n <= uew::linalg::MAX_DIM)
        .ok_or(Failure::Lib(UewError::DimensionTooLarge(d_a.saturating_mul(d_b))))?;
    let re = std::slice::from_raw_parts(re, n * n);
    let im = if im.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(im, n * n))
    };
    let entries = (0..n * n)
        .map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k])))
        .collect();
    Ok(((d_a, d_b), entries))
}

fn optimizer(restarts: u32, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts: if restarts == 0 { OptimizerConfig::default().restarts } else { restarts as usize },
        seed,
        ..OptimizerConfig::default()
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uew_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full length
/// in bytes without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn uew_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses an operator from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uew_operator_from_json(json: *const c_char, out_op: *mut *mut UewOperator) -> UewStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let slot = out(out_op, "out_op")?;
        *slot = boxed(UewOperator(parse_operator(text)?));
        Ok(())
    })
}

/// Builds an operator from row-major real and imaginary parts of length
/// `(d_a·d_b)²`. `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `(d_a·d_b)²` doubles.
#[no_mangle]
pub unsafe extern "C" fn uew_operator_from_arrays(
    d_a: usize,
    d_b: usize,
    re: *const f64,
    im: *const f64,
    out_op: *mut *mut UewOperator,
) -> UewStatus {
    guard(|| {
        let (dims, entries) = complex_entries(d_a, d_b, re, im)?;
        let slot = out(out_op, "out_op")?;
        *slot = boxed(UewOperator(HermitianOperator::new_symmetrized(
            dims,
            entries,
            uew::io::LOAD_HERMITIAN_TOL,
        )?));
        Ok(())
    })
}

/// Releases an operator handle. Null is ignored.
///
/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uew_operator_free(op: *mut UewOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Writes the two local dimensions of an operator.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn uew_operator_dims(op: *const UewOperator, d_a: *mut usize, d_b: *mut usize) -> UewStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let (a, b) = (out(d_a, "d_a")?, out(d_b, "d_b")?);
        (*a, *b) = op.0.dims();
        Ok(())
    })
}

/// Parses a density matrix from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uew_state_from_json(json: *const c_char, out_state: *mut *mut UewState) -> UewStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let slot = out(out_state, "out_state")?;
        *slot = boxed(UewState(parse_state(text)?));
        Ok(())
    })
}

/// Builds a density matrix from row-major parts; checked for unit trace
/// and positivity.
///
/// # Safety
/// As for [`uew_operator_from_arrays`].
#[no_mangle]
pub unsafe extern "C" fn uew_state_from_arrays(
    d_a: usize,
    d_b: usize,
    re: *const f64,
    im: *const f64,
    out_state: *mut *mut UewState,
) -> UewStatus {
    guard(|| {
        let (dims, entries) = complex_entries(d_a, d_b, re, im)?;
        let slot = out(out_state, "out_state")?;
        let op = HermitianOperator::new_symmetrized(dims, entries, uew::io::LOAD_HERMITIAN_TOL)?;
        *slot = boxed(UewState(DensityMatrix::new(op)?));
        Ok(())
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uew_state_free(state: *mut UewState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// `Tr(op·state)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn uew_expectation(op: *const UewOperator, state: *const UewState, value: *mut f64) -> UewStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let st = deref(state, "state")?;
        let slot = out(value, "value")?;
        *slot = expectation(&op.0, &st.0)?;
        Ok(())
    })
}

/// Supremum of `⟨a,b|L|a,b⟩` over product states. `restarts = 0` selects
/// the default. `converged` may be null.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn uew_gs(
    test: *const UewOperator,
    restarts: u32,
    seed: u64,
    value: *mut f64,
    converged: *mut bool,
) -> UewStatus {
    guard(|| {
        let l = deref(test, "test")?;
        let slot = out(value, "value")?;
        let r = sup_product_unconstrained(&l.0, &optimizer(restarts, seed))?;
        *slot = r.value;
        if let Some(c) = converged.as_mut() {
            *c = r.converged;
        }
        Ok(())
    })
}

/// Supremum over product states with `Tr(Cρ) ≤ c` or `≥ c`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn uew_pc(
    test: *const UewOperator,
    constraint: *const UewOperator,
    c: f64,
    side: UewSide,
    restarts: u32,
    seed: u64,
    value: *mut f64,
) -> UewStatus {
    guard(|| {
        let l = deref(test, "test")?;
        let cop = deref(constraint, "constraint")?;
        let slot = out(value, "value")?;
        let spec = ConstraintSpec::new(cop.0.clone(), c)?;
        let side = match side {
            UewSide::Leq => HalfSpaceSide::Leq,
            UewSide::Geq => HalfSpaceSide::Geq,
        };
        *slot = sup_product_constrained(&l.0, &spec, side, &optimizer(restarts, seed))?.value;
        Ok(())
    })
}

fn example_cfg(x: f64, povm: UewPovm) -> Example31Config {
    Example31Config {
        x,
        povm: match povm {
            UewPovm::Complete => PovmConvention::Complete,
            UewPovm::Printed => PovmConvention::AsPrinted,
        },
        ..Example31Config::default()
    }
}

/// Test and constraint operators of the two-qubit worked example.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn uew_example31_operators(
    x: f64,
    povm: UewPovm,
    out_test: *mut *mut UewOperator,
    out_constraint: *mut *mut UewOperator,
) -> UewStatus {
    guard(|| {
        let t = out(out_test, "out_test")?;
        let c = out(out_constraint, "out_constraint")?;
        let ex = build_example31(&example_cfg(x, povm))?;
        *t = boxed(UewOperator(ex.test));
        *c = boxed(UewOperator(ex.constraint));
        Ok(())
    })
}

/// Member `(p/4)·I + (1-p)|φ⟩⟨φ|` of the worked example's noisy family.
///
/// # Safety
/// `out_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uew_example31_state(p: f64, out_state: *mut *mut UewState) -> UewStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let fam = NoisyStateFamily::example31(&Example31Config::default())?;
        *slot = boxed(UewState(fam.member(p)?));
        Ok(())
    })
}

fn alpha_of(a: f64) -> uew::Result<Option<SweepAlpha>> {
    if a.is_nan() {
        Ok(None)
    } else if a == f64::NEG_INFINITY {
        Ok(Some(SweepAlpha::MinusInfinity))
    } else if a < 1.0 {
        Ok(Some(SweepAlpha::Finite(a)))
    } else {
        Err(UewError::InvalidParameter(format!("alpha must be below 1, got {a}")))
    }
}

/// Applies the witness pair to `state`. `alpha` selects the rotation: NaN
/// for the plain pair, `-INFINITY` for the limit witness, otherwise a
/// finite value below 1. `entangled` and `witness_value` may be null.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn uew_detect(
    state: *const UewState,
    test: *const UewOperator,
    constraint: *const UewOperator,
    c: f64,
    alpha: f64,
    seed: u64,
    entangled: *mut bool,
    witness_value: *mut f64,
) -> UewStatus {
    guard(|| {
        let st = deref(state, "state")?;
        let l = deref(test, "test")?;
        let cop = deref(constraint, "constraint")?;
        let spec = ConstraintSpec::new(cop.0.clone(), c)?;
        spec.ensure_distinct_from(&l.0)?;
        let pair = uew_pair_for(&l.0, &spec, alpha_of(alpha)?, &optimizer(0, seed))?;
        let v = detect(&st.0, &pair)?;
        if let Some(e) = entangled.as_mut() {
            *e = v.is_entangled();
        }
        if let Some(w) = witness_value.as_mut() {
            *w = v.witness_value;
        }
        Ok(())
    })
}

/// Noise thresholds of the worked example for `n` rotation parameters
/// (`-INFINITY` for the limit witness). Writes one threshold per entry of
/// `alphas`, NaN where even the noiseless state escapes detection.
///
/// # Safety
/// `alphas` and `thresholds` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn uew_scan_example31(
    x: f64,
    c: f64,
    alphas: *const f64,
    n: usize,
    seed: u64,
    thresholds: *mut f64,
) -> UewStatus {
    guard(|| {
        if alphas.is_null() {
            return Err(Failure::Null("alphas"));
        }
        if thresholds.is_null() {
            return Err(Failure::Null("thresholds"));
        }
        let list = std::slice::from_raw_parts(alphas, n)
            .iter()
            .map(|&a| match alpha_of(a)? {
                Some(s) => Ok(s),
                None => Err(UewError::InvalidParameter("alpha must not be NaN".into())),
            })
            .collect::<uew::Result<Vec<_>>>()?;
        let cfg = Example31Config {
            c,
            ..example_cfg(x, UewPovm::Complete)
        };
        let ex = build_example31(&cfg)?;
        let spec = ConstraintSpec::new(ex.constraint, c)?;
        let fam = NoisyStateFamily::example31(&cfg)?;
        let rows = alpha_sweep(&ex.test, &spec, &list, &fam, &optimizer(0, seed))?;
        let dst = std::slice::from_raw_parts_mut(thresholds, n);
        for (d, r) in dst.iter_mut().zip(rows) {
            *d = r.threshold_p.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}
