//! C ABI for the solver. Problems and results cross the boundary as opaque
//! handles, every entry point returns an integer status code, and the last
//! failure message is kept in thread-local storage. Panics never unwind past
//! the boundary; they are caught and reported as [`VELUM_ERR_PANIC`].
//!
//! The shipped header `include/velum.h` is written by hand and kept in sync
//! with this file by `tests/abi.rs`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use velum::config::RunConfig;
use velum::discretization::ProblemSpec;
use velum::energy::{hypothesis_check, objectivity_check};
use velum::solver::{minimize, MinimizeResult, SolveConfig};
use velum::Error;

pub const VELUM_OK: i32 = 0;
/// Null pointer, invalid UTF-8, or a buffer of the wrong size.
pub const VELUM_ERR_ARGUMENT: i32 = 1;
/// Config could not be read, parsed, or validated.
pub const VELUM_ERR_CONFIG: i32 = 2;
/// The solver stopped before reaching its gradient tolerance. The result
/// handle is still produced.
pub const VELUM_ERR_NOT_CONVERGED: i32 = 3;
/// The configured density fails an admissibility check.
pub const VELUM_ERR_HYPOTHESIS: i32 = 4;
/// Degenerate state or another numerical failure during evaluation.
pub const VELUM_ERR_NUMERICS: i32 = 5;
/// An internal panic was caught at the boundary.
pub const VELUM_ERR_PANIC: i32 = 6;

// Admissibility gate parameters, mirroring the CLI `check` subcommand.
const HYPOTHESIS_SAMPLES: usize = 2000;
const OBJECTIVITY_SAMPLES: usize = 1000;
const OBJECTIVITY_GATE: f64 = 1e-10;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = owned);
}

fn code_for(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Io(_) => VELUM_ERR_CONFIG,
        Error::HypothesisViolation { .. } | Error::Inapplicable { .. } => VELUM_ERR_HYPOTHESIS,
        _ => VELUM_ERR_NUMERICS,
    }
}

fn fail(err: &Error) -> i32 {
    set_error(&err.to_string());
    code_for(err)
}

/// Runs an entry-point body, converting panics into an error code.
fn guard(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("internal panic: {msg}"));
            VELUM_ERR_PANIC
        }
    }
}

/// # Safety
/// `p` must be null or a NUL-terminated string.
unsafe fn utf8<'a>(p: *const c_char) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error("null string argument");
        return Err(VELUM_ERR_ARGUMENT);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        VELUM_ERR_ARGUMENT
    })
}

fn null_arg(name: &str) -> i32 {
    set_error(&format!("null {name} argument"));
    VELUM_ERR_ARGUMENT
}

/// A validated problem plus its solver settings, built from a run config.
pub struct velum_problem {
    spec: ProblemSpec,
    solve: SolveConfig,
}

/// A finished minimization.
pub struct velum_result {
    inner: MinimizeResult,
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn velum_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message of the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn velum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn build_problem(cfg: &RunConfig, base: &Path, out: *mut *mut velum_problem) -> i32 {
    match cfg.build(base) {
        Ok((spec, solve)) => {
            let handle = Box::new(velum_problem { spec, solve });
            unsafe { *out = Box::into_raw(handle) };
            VELUM_OK
        }
        Err(e) => fail(&e),
    }
}

/// Parses a run config from a JSON string. Relative paths inside the config
/// resolve against the current directory.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_from_json(
    json: *const c_char,
    out: *mut *mut velum_problem,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let text = match utf8(json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match RunConfig::from_json(text) {
            Ok(cfg) => build_problem(&cfg, Path::new("."), out),
            Err(e) => fail(&e),
        }
    })
}

/// Loads a run config from a JSON file. Relative paths inside the config
/// resolve against the file's directory.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_from_file(
    path: *const c_char,
    out: *mut *mut velum_problem,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let path = match utf8(path) {
            Ok(t) => Path::new(t),
            Err(code) => return code,
        };
        let base = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => Path::new(".").to_path_buf(),
        };
        match RunConfig::from_path(path) {
            Ok(cfg) => build_problem(&cfg, &base, out),
            Err(e) => fail(&e),
        }
    })
}

/// Releases a problem handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a pointer from `velum_problem_from_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_free(p: *mut velum_problem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Writes the grid node counts along x and y.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_grid(
    p: *const velum_problem,
    nx: *mut u32,
    ny: *mut u32,
) -> i32 {
    guard(|| {
        if p.is_null() {
            return null_arg("problem");
        }
        if nx.is_null() || ny.is_null() {
            return null_arg("nx/ny");
        }
        let problem = &*p;
        *nx = problem.spec.grid.nx as u32;
        *ny = problem.spec.grid.ny as u32;
        VELUM_OK
    })
}

/// Overrides the seed of the solver's start perturbation.
///
/// # Safety
/// `p` must be a valid problem handle.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_set_seed(p: *mut velum_problem, seed: u64) -> i32 {
    guard(|| {
        if p.is_null() {
            return null_arg("problem");
        }
        (*p).solve.seed = seed;
        VELUM_OK
    })
}

/// Runs the density admissibility checks the CLI `check` subcommand applies:
/// growth exponent, sampled coercivity, and objectivity. Returns
/// `VELUM_ERR_HYPOTHESIS` with a message on the first failure. A split
/// density with zero tangential weight fails unless `allow_noncoercive` is
/// nonzero.
///
/// # Safety
/// `p` must be a valid problem handle.
#[no_mangle]
pub unsafe extern "C" fn velum_problem_check(
    p: *const velum_problem,
    seed: u64,
    allow_noncoercive: i32,
) -> i32 {
    guard(|| {
        if p.is_null() {
            return null_arg("problem");
        }
        let material = &(*p).spec.material;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hypothesis = match hypothesis_check(material, HYPOTHESIS_SAMPLES, 0.1, 10.0, &mut rng)
        {
            Ok(h) => h,
            Err(e) => return fail(&e),
        };
        if !hypothesis.growth_ok {
            set_error(&format!(
                "growth exponent q = {} is below the coercivity threshold 2p/(p-2) = {}",
                hypothesis.q, hypothesis.growth_threshold,
            ));
            return VELUM_ERR_HYPOTHESIS;
        }
        if hypothesis.coercivity_violations > 0 {
            set_error(&format!(
                "sampled coercivity bound failed on {} of {} states",
                hypothesis.coercivity_violations, hypothesis.sample_count,
            ));
            return VELUM_ERR_HYPOTHESIS;
        }
        let objectivity = match objectivity_check(material, OBJECTIVITY_SAMPLES, &mut rng) {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        if objectivity.max_relative_deviation > OBJECTIVITY_GATE {
            set_error(&format!(
                "objectivity deviation {:.3e} exceeds {OBJECTIVITY_GATE:.0e}",
                objectivity.max_relative_deviation,
            ));
            return VELUM_ERR_HYPOTHESIS;
        }
        if material.noncoercive_split() && allow_noncoercive == 0 {
            set_error(
                "split density with c_Gamma = 0 is non-coercive: only the normal \
                 part of the second gradient is controlled",
            );
            return VELUM_ERR_HYPOTHESIS;
        }
        VELUM_OK
    })
}

/// Minimizes the problem from its configured placement. On `VELUM_OK` and on
/// `VELUM_ERR_NOT_CONVERGED` a result handle is written to `out`; on any
/// other code `out` is untouched.
///
/// # Safety
/// `p` must be a valid problem handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn velum_solve(p: *const velum_problem, out: *mut *mut velum_result) -> i32 {
    guard(|| {
        if p.is_null() {
            return null_arg("problem");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let problem = &*p;
        let start = problem.spec.boundary.f_o.clone();
        match minimize(&start, &problem.spec, &problem.solve) {
            Ok(inner) => {
                let code = if inner.converged {
                    VELUM_OK
                } else {
                    set_error(&format!(
                        "solver stopped without converging after {} iterations (grad norm {:.3e})",
                        inner.iterations, inner.grad_norm,
                    ));
                    VELUM_ERR_NOT_CONVERGED
                };
                *out = Box::into_raw(Box::new(velum_result { inner }));
                code
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a result handle. Null is ignored.
///
/// # Safety
/// `r` must be null or a pointer from `velum_solve`, freed once.
#[no_mangle]
pub unsafe extern "C" fn velum_result_free(r: *mut velum_result) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Writes 1 if the solve converged, 0 otherwise.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_result_converged(r: *const velum_result, out: *mut i32) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if out.is_null() {
            return null_arg("out");
        }
        *out = i32::from((*r).inner.converged);
        VELUM_OK
    })
}

/// Writes the number of iterations the solver took.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_result_iterations(r: *const velum_result, out: *mut u64) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if out.is_null() {
            return null_arg("out");
        }
        *out = (*r).inner.iterations as u64;
        VELUM_OK
    })
}

/// Writes total, membrane, bending, and barrier energy into `out[0..4]`.
///
/// # Safety
/// `r` must be valid; `out` must point to at least four doubles.
#[no_mangle]
pub unsafe extern "C" fn velum_result_energy(r: *const velum_result, out: *mut f64) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let e = &(*r).inner.energy;
        let slice = std::slice::from_raw_parts_mut(out, 4);
        slice.copy_from_slice(&[e.total, e.membrane, e.bending, e.barrier]);
        VELUM_OK
    })
}

/// Writes the work of the external loads and the total potential
/// (stored energy minus load work).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_result_potential(
    r: *const velum_result,
    load_work: *mut f64,
    potential: *mut f64,
) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if load_work.is_null() || potential.is_null() {
            return null_arg("load_work/potential");
        }
        *load_work = (*r).inner.load_work;
        *potential = (*r).inner.potential;
        VELUM_OK
    })
}

/// Writes the final projected gradient max-norm and the minimum areal
/// Jacobian over the grid.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_result_stats(
    r: *const velum_result,
    grad_norm: *mut f64,
    min_j: *mut f64,
) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if grad_norm.is_null() || min_j.is_null() {
            return null_arg("grad_norm/min_j");
        }
        *grad_norm = (*r).inner.grad_norm;
        *min_j = (*r).inner.min_j;
        VELUM_OK
    })
}

/// Writes the number of grid nodes in the result's deformation field.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn velum_result_node_count(r: *const velum_result, out: *mut usize) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if out.is_null() {
            return null_arg("out");
        }
        *out = (*r).inner.field.len();
        VELUM_OK
    })
}

/// Copies the deformed nodal positions into `buf` as xyz triples, row-major
/// with x running fastest. `len` must equal three times the node count.
///
/// # Safety
/// `r` must be valid; `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn velum_result_field(
    r: *const velum_result,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        if r.is_null() {
            return null_arg("result");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let field = &(*r).inner.field;
        if len != 3 * field.len() {
            set_error(&format!(
                "field buffer holds {len} doubles but the grid needs {}",
                3 * field.len(),
            ));
            return VELUM_ERR_ARGUMENT;
        }
        let slice = std::slice::from_raw_parts_mut(buf, len);
        for (chunk, node) in slice.chunks_exact_mut(3).zip(&field.values) {
            chunk.copy_from_slice(node);
        }
        VELUM_OK
    })
}
