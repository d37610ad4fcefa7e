//! C ABI over `trm-core`.
//!
//! Conventions:
//! - every fallible call returns a [`TrmStatus`]; results go through out-pointers
//! - on failure, `trm_last_error_message` returns a description (per thread)
//! - handles (`TrmState`, `TrmPartition`, `TrmRng`) are opaque and must be
//!   released with their `_free` function; passing NULL to `_free` is a no-op
//! - indices are 0-based, like the Rust API
//! - array outputs take a capacity; `TRM_STATUS_BUFFER_TOO_SMALL` is returned (and
//!   nothing written) when it is smaller than the result

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trm_core::checker::{self, JointTriple, KolmogorovVerdict, PairwiseTransitions, QubitVerdict};
use trm_core::runner::{self, RunError, RunOptions};
use trm_core::{density, simplex, universal, utr, BarycentricVector, OutcomePartition, TrmError};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrmStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    IndexOutOfRange = 3,
    DimensionMismatch = 4,
    Boundary = 5,
    ImpossibleOutcome = 6,
    DegenerateDensity = 7,
    ResampleLimit = 8,
    Schema = 9,
    BufferTooSmall = 10,
    Io = 11,
    CheckFailed = 12,
    Panic = 99,
}

/// A point of the probability simplex.
pub struct TrmState(BarycentricVector);

/// A grouping of outcomes into blocks.
pub struct TrmPartition(OutcomePartition);

/// A seeded random stream.
pub struct TrmRng(ChaCha8Rng);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &TrmError) -> TrmStatus {
    match e {
        TrmError::Domain(_) => TrmStatus::Domain,
        TrmError::IndexOutOfRange { .. } => TrmStatus::IndexOutOfRange,
        TrmError::DimensionMismatch { .. } => TrmStatus::DimensionMismatch,
        TrmError::Boundary => TrmStatus::Boundary,
        TrmError::ImpossibleOutcome => TrmStatus::ImpossibleOutcome,
        TrmError::DegenerateDensity(_) => TrmStatus::DegenerateDensity,
        TrmError::ResampleLimit(_) => TrmStatus::ResampleLimit,
        TrmError::Schema(_) => TrmStatus::Schema,
    }
}

enum Failure {
    Status(TrmStatus, String),
}

impl From<TrmError> for Failure {
    fn from(e: TrmError) -> Self {
        Failure::Status(status_of(&e), e.to_string())
    }
}

fn fail(status: TrmStatus, msg: impl Into<String>) -> Failure {
    Failure::Status(status, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TrmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TrmStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            TrmStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TrmStatus::NullPointer, "null input array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(TrmStatus::NullPointer, format!("null {what}")))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(TrmStatus::NullPointer, "null output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_array<T: Copy>(out: *mut T, cap: usize, v: &[T]) -> Result<(), Failure> {
    if cap < v.len() {
        return Err(fail(
            TrmStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", v.len()),
        ));
    }
    if v.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(fail(TrmStatus::NullPointer, "null output array"));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length plus one, or 0 when
/// there is no error.
///
/// # Safety
/// `buf` must be NULL or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn trm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

// ---- states ----

/// Creates a state from `n` nonnegative weights summing to 1.
///
/// # Safety
/// `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_state_new(x: *const f64, n: usize, out: *mut *mut TrmState) -> TrmStatus {
    guard(|| {
        let v = BarycentricVector::new(slice(x, n)?.to_vec())?;
        write(out, Box::into_raw(Box::new(TrmState(v))))
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn trm_state_free(state: *mut TrmState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of components; 0 for NULL.
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trm_state_dim(state: *const TrmState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be a live handle and `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn trm_state_components(state: *const TrmState, out: *mut f64, cap: usize) -> TrmStatus {
    guard(|| write_array(out, cap, handle(state, "state")?.0.components()))
}

// ---- partitions ----

/// Creates a partition from per-outcome block labels: outcome `i` goes to
/// block `labels[i]`. Labels must be `0..k` with every block used.
///
/// # Safety
/// `labels` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_partition_new(labels: *const usize, n: usize, out: *mut *mut TrmPartition) -> TrmStatus {
    guard(|| {
        let labels = slice(labels, n)?;
        if let Some(&m) = labels.iter().find(|&&l| l >= n) {
            return Err(fail(
                TrmStatus::Domain,
                format!("block label {m} must be below the outcome count {n}"),
            ));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l].push(i);
        }
        let p = OutcomePartition::new(n, blocks)?;
        write(out, Box::into_raw(Box::new(TrmPartition(p))))
    })
}

/// The partition into `n` single outcomes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_partition_singletons(n: usize, out: *mut *mut TrmPartition) -> TrmStatus {
    guard(|| {
        let p = OutcomePartition::singletons(n)?;
        write(out, Box::into_raw(Box::new(TrmPartition(p))))
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn trm_partition_free(p: *mut TrmPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of blocks; 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trm_partition_len(p: *const TrmPartition) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

// ---- random streams ----

/// A ChaCha8 stream; equal `(seed, stream)` pairs give equal draws.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_rng_new(seed: u64, stream: u64, out: *mut *mut TrmRng) -> TrmStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        write(out, Box::into_raw(Box::new(TrmRng(rng))))
    })
}

/// # Safety
/// `rng` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn trm_rng_free(rng: *mut TrmRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

// ---- geometry ----

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_simplex_measure(n: usize, out: *mut f64) -> TrmStatus {
    guard(|| write(out, simplex::simplex_measure(n)?))
}

/// # Safety
/// `state` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trm_region_measure(state: *const TrmState, i: usize, out: *mut f64) -> TrmStatus {
    guard(|| write(out, simplex::region_measure(&handle(state, "state")?.0, i)?))
}

/// Index of the region containing the break point `lambda`.
///
/// # Safety
/// `state` must be live; `lambda` must point to `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trm_region_of(
    state: *const TrmState,
    lambda: *const f64,
    n: usize,
    out: *mut usize,
) -> TrmStatus {
    guard(|| {
        let l = BarycentricVector::new(slice(lambda, n)?.to_vec())?;
        write(out, simplex::region_of(&handle(state, "state")?.0, &l)?)
    })
}

// ---- membrane measurements ----

/// Block probabilities (one per block of `p`).
///
/// # Safety
/// Handles must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn trm_outcome_probabilities(
    state: *const TrmState,
    p: *const TrmPartition,
    out: *mut f64,
    cap: usize,
) -> TrmStatus {
    guard(|| {
        let probs = utr::outcome_probabilities(&handle(state, "state")?.0, &handle(p, "partition")?.0)?;
        write_array(out, cap, &probs)
    })
}

/// Post-measurement state for block `block`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trm_collapse(
    state: *const TrmState,
    p: *const TrmPartition,
    block: usize,
    out: *mut *mut TrmState,
) -> TrmStatus {
    guard(|| {
        let p = &handle(p, "partition")?.0;
        let post = utr::collapse(&handle(state, "state")?.0, p.block(block)?)?;
        write(out, Box::into_raw(Box::new(TrmState(post))))
    })
}

/// One simulated measurement. `post` may be NULL if the collapsed state is
/// not needed.
///
/// # Safety
/// Handles must be live; `block` writable; `post` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn trm_run_once(
    state: *const TrmState,
    p: *const TrmPartition,
    rng: *mut TrmRng,
    block: *mut usize,
    post: *mut *mut TrmState,
) -> TrmStatus {
    guard(|| {
        let rng = rng.as_mut().ok_or_else(|| fail(TrmStatus::NullPointer, "null rng"))?;
        let o = utr::run_once(&handle(state, "state")?.0, &handle(p, "partition")?.0, &mut rng.0)?;
        write(block, o.block_index)?;
        if !post.is_null() {
            post.write(Box::into_raw(Box::new(TrmState(o.post_state))));
        }
        Ok(())
    })
}

/// Block counts over `trials` measurements; identical for equal seeds.
///
/// # Safety
/// Handles must be live; `counts` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn trm_run_many(
    state: *const TrmState,
    p: *const TrmPartition,
    trials: u64,
    seed: u64,
    counts: *mut u64,
    cap: usize,
) -> TrmStatus {
    guard(|| {
        let t = utr::run_many(&handle(state, "state")?.0, &handle(p, "partition")?.0, trials, seed)?;
        write_array(counts, cap, &t.counts)
    })
}

/// Closed-form law of the complementary model (N = 2 or 3).
///
/// # Safety
/// `lambda` must point to `n` doubles; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn trm_complementary_probabilities(
    lambda: *const f64,
    n: usize,
    out: *mut f64,
    cap: usize,
) -> TrmStatus {
    guard(|| {
        let l = BarycentricVector::new(slice(lambda, n)?.to_vec())?;
        write_array(out, cap, &utr::complementary_probabilities(&l)?)
    })
}

/// Outcome probabilities `(p_plus, p_minus)` of the ε-model.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_epsilon_probability(
    cos_theta: f64,
    epsilon: f64,
    p_plus: *mut f64,
    p_minus: *mut f64,
) -> TrmStatus {
    guard(|| {
        let (a, b) = density::epsilon_probability(cos_theta, epsilon)?;
        write(p_plus, a)?;
        write(p_minus, b)
    })
}

/// Exact universal average on `n_c` cells (N = 2, or N = 3 with square `n_c <= 16`).
///
/// # Safety
/// Handles must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn trm_universal_probability_exact(
    state: *const TrmState,
    n_c: usize,
    p: *const TrmPartition,
    out: *mut f64,
    cap: usize,
) -> TrmStatus {
    guard(|| {
        let probs =
            universal::universal_probability_exact(&handle(state, "state")?.0, n_c, &handle(p, "partition")?.0)?;
        write_array(out, cap, &probs)
    })
}

// ---- classification ----

/// Classical bound check. `violated` receives 0 or 1; `margin` receives
/// `pVW - pUW - pUcV`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_kolmogorov_check(
    p_vw: f64,
    p_uw: f64,
    p_ucv: f64,
    tol: f64,
    violated: *mut i32,
    margin: *mut f64,
) -> TrmStatus {
    guard(|| {
        let t = JointTriple::new(p_vw, p_uw, p_ucv)?;
        let v = checker::kolmogorov_check(&t, tol);
        write(violated, matches!(v, KolmogorovVerdict::Violated { .. }) as i32)?;
        write(margin, p_vw - p_uw - p_ucv)
    })
}

/// Qubit realizability of three transition probabilities. `deficit` is 0
/// when embeddable.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn trm_qubit_embeddable(
    p_ab: f64,
    p_bc: f64,
    p_ac: f64,
    tol: f64,
    embeddable: *mut i32,
    deficit: *mut f64,
) -> TrmStatus {
    guard(|| {
        let t = PairwiseTransitions::new(p_ab, p_bc, p_ac)?;
        let (ok, d) = match checker::qubit_embeddable(&t, tol) {
            QubitVerdict::Embeddable => (1, 0.0),
            QubitVerdict::NotEmbeddable { deficit } => (0, deficit),
        };
        write(embeddable, ok)?;
        write(deficit, d)
    })
}

// ---- batch runner ----

/// Runs an experiment config given as JSON text and returns the JSON report
/// in `out` (free with `trm_string_free`). A failed oracle check still
/// returns the report, with status `TRM_STATUS_CHECK_FAILED`.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trm_run_config_json(config: *const c_char, out: *mut *mut c_char) -> TrmStatus {
    let mut check_failed = false;
    let status = guard(|| {
        if config.is_null() {
            return Err(fail(TrmStatus::NullPointer, "null config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| fail(TrmStatus::Schema, "config is not UTF-8"))?;
        let opts = RunOptions {
            format: Some(runner::Format::Json),
            ..Default::default()
        };
        let outcome = runner::run_text(text, &opts).map_err(|e| match e {
            RunError::Schema(m) => fail(TrmStatus::Schema, m),
            RunError::Domain(d) => Failure::from(d),
            RunError::Io { .. } => fail(TrmStatus::Io, e.to_string()),
        })?;
        check_failed = outcome.exit_code == runner::EXIT_CHECK_FAILED;
        let s = CString::new(outcome.rendered).map_err(|_| fail(TrmStatus::Domain, "NUL in report"))?;
        write(out, s.into_raw())
    });
    if status == TrmStatus::Ok && check_failed {
        set_error("deviation above threshold");
        return TrmStatus::CheckFailed;
    }
    status
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn trm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
