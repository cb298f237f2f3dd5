//! C ABI for the `splp` community recovery library.
//!
//! Conventions:
//! - Every function returns an [`SplpStatus`] (or a plain value where noted).
//!   On failure, [`splp_last_error_message`] describes the most recent error
//!   on the calling thread.
//! - Graphs and recovery results are opaque handles created by this library
//!   and released with the matching `*_free` function. Passing NULL to a free
//!   function is a no-op.
//! - Matrices are dense, row-major `double` arrays.
//! - Panics never cross the boundary; they surface as `SPLP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use splp::evaluation::entrywise_error;
use splp::linalg::DenseMatrix;
use splp::mmsb::{
    build_probability_matrix, default_samples, sample_adjacency_average, sample_theta, GraphKind,
};
use splp::rng::seeded;
use splp::theory::{compute_bounds_from_kappa, reg_incomplete_beta, EpsilonChoice, MinN};
use splp::{Error, LpStatus, MmsbParams, RecoveryMode, RecoveryResult, WeightedGraph};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ConvergenceFailure = 3,
    ParseError = 4,
    IoError = 5,
    /// The sample-size condition cannot be met in double precision.
    Unsatisfiable = 6,
    /// An output buffer is too small.
    BufferTooSmall = 7,
    Panic = 8,
}

/// Input interpretation for [`splp_recover`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplpMode {
    /// The graph is the exact probability matrix P.
    Exact = 0,
    /// The graph is an observed adjacency; uses its top-k eigenvectors.
    Spectral = 1,
}

/// Outcome of one community's linear program.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplpLpStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
    /// No anchor was found, or the solver stopped without a verdict.
    NotSolved = 3,
}

/// Opaque weighted graph.
pub struct SplpGraph {
    graph: WeightedGraph,
}

/// Opaque recovery result.
pub struct SplpRecovery {
    result: RecoveryResult,
}

/// Written to anchor slots of communities without an anchor.
pub const SPLP_NO_ANCHOR: usize = usize::MAX;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SplpStatus, msg: impl Into<String>) -> SplpStatus {
    set_last_error(msg.into());
    status
}

fn from_error(err: Error) -> SplpStatus {
    let status = match &err {
        Error::InvalidInput(_) => SplpStatus::InvalidInput,
        Error::ConvergenceFailure { .. } => SplpStatus::ConvergenceFailure,
        Error::Parse { .. } => SplpStatus::ParseError,
        Error::Io(_) => SplpStatus::IoError,
    };
    fail(status, err.to_string())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SplpStatus>) -> SplpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SplpStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(SplpStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SplpStatus>;
}

impl<T> OrStatus<T> for splp::Result<T> {
    fn or_status(self) -> Result<T, SplpStatus> {
        self.map_err(from_error)
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), SplpStatus> {
    if p.is_null() {
        Err(fail(SplpStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

fn checked_len(a: usize, b: usize) -> Result<usize, SplpStatus> {
    a.checked_mul(b)
        .ok_or_else(|| fail(SplpStatus::InvalidInput, "matrix dimensions overflow"))
}

/// Copies the most recent error message of this thread into `buf` (NUL
/// terminated, truncated to `len` bytes) and returns the full message length
/// including the terminator; 0 if there is no error message. `buf` may be
/// NULL to query the length.
///
/// # Safety
/// `buf` must be NULL or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn splp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn splp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from a dense symmetric `n×n` matrix with entries in
/// `[0, 1]`.
///
/// # Safety
/// `adjacency` must point to `n*n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splp_graph_from_dense(
    n: usize,
    adjacency: *const f64,
    out: *mut *mut SplpGraph,
) -> SplpStatus {
    guard(|| {
        non_null(adjacency, "adjacency")?;
        non_null(out, "out")?;
        let len = checked_len(n, n)?;
        let data = std::slice::from_raw_parts(adjacency, len).to_vec();
        let adj = DenseMatrix::from_vec(n, n, data).or_status()?;
        let graph = WeightedGraph::new(adj, GraphKind::Observed, 0).or_status()?;
        *out = Box::into_raw(Box::new(SplpGraph { graph }));
        Ok(())
    })
}

/// Samples an MMSB graph. In `Exact` mode the graph is `P = ΘBΘᵀ`; in
/// `Spectral` mode it is the average of `samples` adjacency draws
/// (`samples == 0` means `⌈√n⌉`). When `theta_out` is not NULL it receives
/// the ground-truth Θ (`n*k` doubles, row-major).
///
/// # Safety
/// `b` must point to `k*k` readable doubles; `theta_out` must be NULL or
/// valid for `n*k` writes; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn splp_graph_generate(
    n: usize,
    k: usize,
    alpha: f64,
    b: *const f64,
    mode: SplpMode,
    samples: usize,
    seed: u64,
    theta_out: *mut f64,
    out: *mut *mut SplpGraph,
) -> SplpStatus {
    guard(|| {
        non_null(b, "b")?;
        non_null(out, "out")?;
        let bk = std::slice::from_raw_parts(b, checked_len(k, k)?).to_vec();
        let bm = DenseMatrix::from_vec(k, k, bk).or_status()?;
        let params = MmsbParams::new(n, k, alpha, bm).or_status()?;
        let mut rng = seeded(seed);
        let theta = sample_theta(&params, &mut rng);
        let p = build_probability_matrix(&theta, &params.b).or_status()?;
        let graph = match mode {
            SplpMode::Exact => p,
            SplpMode::Spectral => {
                let s = if samples == 0 { default_samples(n) } else { samples };
                sample_adjacency_average(&p, s, &mut rng).or_status()?
            }
        };
        if !theta_out.is_null() {
            let src = theta.as_matrix().as_slice();
            std::ptr::copy_nonoverlapping(src.as_ptr(), theta_out, src.len());
        }
        *out = Box::into_raw(Box::new(SplpGraph { graph }));
        Ok(())
    })
}

/// Number of nodes; 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn splp_graph_node_count(graph: *const SplpGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.n())
}

/// Copies the `n×n` adjacency into `out` (`len ≥ n*n` doubles).
///
/// # Safety
/// `graph` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn splp_graph_copy_adjacency(
    graph: *const SplpGraph,
    out: *mut f64,
    len: usize,
) -> SplpStatus {
    guard(|| {
        non_null(graph, "graph")?;
        non_null(out, "out")?;
        let src = (*graph).graph.adjacency().as_slice();
        copy_out(src, out, len)
    })
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> Result<(), SplpStatus> {
    if len < src.len() {
        return Err(fail(
            SplpStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn splp_graph_free(graph: *mut SplpGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Runs SP+LP with `k` communities.
///
/// # Safety
/// `graph` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn splp_recover(
    graph: *const SplpGraph,
    k: usize,
    mode: SplpMode,
    seed: u64,
    out: *mut *mut SplpRecovery,
) -> SplpStatus {
    guard(|| {
        non_null(graph, "graph")?;
        non_null(out, "out")?;
        let mode = match mode {
            SplpMode::Exact => RecoveryMode::Exact,
            SplpMode::Spectral => RecoveryMode::Spectral,
        };
        let mut rng = seeded(seed);
        let result = splp::recover_all(&(*graph).graph, k, mode, &mut rng).or_status()?;
        *out = Box::into_raw(Box::new(SplpRecovery { result }));
        Ok(())
    })
}

/// Writes the dimensions `n` and `k` of the recovered Θ̂.
///
/// # Safety
/// `rec` must be a live handle; `n` and `k` writable.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_dims(
    rec: *const SplpRecovery,
    n: *mut usize,
    k: *mut usize,
) -> SplpStatus {
    guard(|| {
        non_null(rec, "recovery")?;
        non_null(n, "n")?;
        non_null(k, "k")?;
        let t = &(*rec).result.theta_hat;
        *n = t.rows();
        *k = t.cols();
        Ok(())
    })
}

/// Copies Θ̂ (row-major `n*k` doubles) into `out`.
///
/// # Safety
/// `rec` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_copy_theta(
    rec: *const SplpRecovery,
    out: *mut f64,
    len: usize,
) -> SplpStatus {
    guard(|| {
        non_null(rec, "recovery")?;
        non_null(out, "out")?;
        copy_out((*rec).result.theta_hat.as_slice(), out, len)
    })
}

/// Copies the `k` anchor node indices; missing anchors are
/// `SPLP_NO_ANCHOR`.
///
/// # Safety
/// `rec` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_copy_anchors(
    rec: *const SplpRecovery,
    out: *mut usize,
    len: usize,
) -> SplpStatus {
    guard(|| {
        non_null(rec, "recovery")?;
        non_null(out, "out")?;
        let anchors: Vec<usize> = (*rec)
            .result
            .columns
            .iter()
            .map(|c| c.anchor.unwrap_or(SPLP_NO_ANCHOR))
            .collect();
        copy_out(&anchors, out, len)
    })
}

/// Status of community `j`'s linear program.
///
/// # Safety
/// `rec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_column_status(
    rec: *const SplpRecovery,
    j: usize,
    out: *mut SplpLpStatus,
) -> SplpStatus {
    guard(|| {
        non_null(rec, "recovery")?;
        non_null(out, "out")?;
        let columns = &(*rec).result.columns;
        let col = columns.get(j).ok_or_else(|| {
            fail(SplpStatus::InvalidInput, format!("column {j} out of range 0..{}", columns.len()))
        })?;
        *out = match col.status {
            Some(LpStatus::Optimal) => SplpLpStatus::Optimal,
            Some(LpStatus::Infeasible) => SplpLpStatus::Infeasible,
            Some(LpStatus::Unbounded) => SplpLpStatus::Unbounded,
            None => SplpLpStatus::NotSolved,
        };
        Ok(())
    })
}

/// 1 if every community's LP ended optimal with a normalized column, else 0
/// (also 0 for NULL).
///
/// # Safety
/// `rec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_all_optimal(rec: *const SplpRecovery) -> c_int {
    rec.as_ref().map_or(0, |r| c_int::from(r.result.all_optimal()))
}

/// Releases a recovery result. NULL is ignored.
///
/// # Safety
/// `rec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn splp_recovery_free(rec: *mut SplpRecovery) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Permutation-matched entrywise error between two `n×k` row-major matrices.
///
/// # Safety
/// `theta_hat` and `theta` must each point to `n*k` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn splp_entrywise_error(
    theta_hat: *const f64,
    theta: *const f64,
    n: usize,
    k: usize,
    out: *mut f64,
) -> SplpStatus {
    guard(|| {
        non_null(theta_hat, "theta_hat")?;
        non_null(theta, "theta")?;
        non_null(out, "out")?;
        let len = checked_len(n, k)?;
        let a = DenseMatrix::from_vec(n, k, std::slice::from_raw_parts(theta_hat, len).to_vec())
            .or_status()?;
        let b = DenseMatrix::from_vec(n, k, std::slice::from_raw_parts(theta, len).to_vec())
            .or_status()?;
        *out = entrywise_error(&a, &b).or_status()?.error;
        Ok(())
    })
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splp_reg_incomplete_beta(x: f64, a: f64, b: f64, out: *mut f64) -> SplpStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = reg_incomplete_beta(x, a, b).or_status()?;
        Ok(())
    })
}

/// Smallest `n` satisfying the sample-size condition of the recovery
/// guarantee. `epsilon <= 0` selects `0.5·min(ε₁, ε₂)`. Returns
/// `SPLP_STATUS_UNSATISFIABLE` when no `n` can be certified.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splp_min_nodes(
    k: usize,
    alpha: f64,
    kappa: f64,
    p: f64,
    epsilon: f64,
    out: *mut u64,
) -> SplpStatus {
    guard(|| {
        non_null(out, "out")?;
        let eps = if epsilon > 0.0 {
            EpsilonChoice::Value(epsilon)
        } else {
            EpsilonChoice::Auto
        };
        match compute_bounds_from_kappa(k, alpha, kappa, p, eps).or_status()?.min_n {
            MinN::Finite(v) => {
                *out = v;
                Ok(())
            }
            MinN::Unsatisfiable => Err(fail(
                SplpStatus::Unsatisfiable,
                "I_{1-eps}(alpha, (k-1) alpha) is within 1e-15 of 1",
            )),
        }
    })
}
