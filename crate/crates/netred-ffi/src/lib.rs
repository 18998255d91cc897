//! C interface over the `netred` crate.
//!
//! Every function is a thin `extern "C"` shell: pointers are checked, panics
//! are caught at the boundary, and failures come back as a [`NetredStatus`]
//! with a human-readable message retrievable through [`netred_last_error`].
//! Systems are passed around as opaque [`NetredSystem`] handles created by
//! [`netred_system_from_string`] and released by [`netred_system_free`];
//! partitions cross the boundary as per-agent cluster label arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use netred::clustering::BasisSource;
use netred::error::Error;
use netred::mor::MorMethod;
use netred::partition::Partition;
use netred::search::{heuristic_pipeline, ClusterAlgo, PipelineConfig, HINF_TOL};
use netred::stabsep::NormError;
use netred::sysfile::SystemFile;

/// Status codes returned by every fallible call.
///
/// Nonzero values match the CLI exit codes for the same failure classes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetredStatus {
    Ok = 0,
    /// Any error not covered by a more specific code.
    Error = 1,
    /// The system description failed to parse.
    Parse = 2,
    /// An enumeration budget was exceeded.
    Budget = 3,
    /// Arguments that are individually valid but cannot be combined.
    InvalidCombination = 4,
    /// Time integration failed.
    Integration = 5,
    /// Null pointer, bad encoding, or out-of-range argument.
    BadArgument = 6,
}

/// MOR method selector for [`netred_pipeline_partition`].
#[repr(u32)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetredMethod {
    Irka = 0,
    BalancedTruncation = 1,
}

/// Projection-basis side selector for [`netred_pipeline_partition`].
#[repr(u32)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetredSource {
    V = 0,
    W = 1,
    /// Combined left/right basis merged by SVD.
    Vw = 2,
}

/// Clustering algorithm selector for [`netred_pipeline_partition`].
#[repr(u32)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetredAlgo {
    Qr = 0,
    Kmeans = 1,
}

/// Opaque handle to a parsed network system.
pub struct NetredSystem {
    file: SystemFile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(err: &Error) -> NetredStatus {
    match err {
        Error::Parse { .. } => NetredStatus::Parse,
        Error::BudgetExceeded(_) => NetredStatus::Budget,
        Error::InvalidCombination(_) => NetredStatus::InvalidCombination,
        Error::Integration { .. } => NetredStatus::Integration,
        _ => NetredStatus::Error,
    }
}

fn fail(err: &Error) -> NetredStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

fn bad_argument(msg: &str) -> NetredStatus {
    set_last_error(msg);
    NetredStatus::BadArgument
}

/// Runs `body` with panics converted to [`NetredStatus::Error`].
fn guarded(body: impl FnOnce() -> NetredStatus) -> NetredStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            NetredStatus::Error
        }
    }
}

/// Copies the message of the most recent failure on this thread into `buf`
/// (truncated, always NUL-terminated when `cap > 0`) and returns the full
/// message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (in which
/// case only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn netred_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a system description (the `netred-system v1` text format) and
/// stores a new handle in `*out`. The handle must be released with
/// [`netred_system_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netred_system_from_string(
    text: *const c_char,
    out: *mut *mut NetredSystem,
) -> NetredStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return bad_argument("null pointer argument");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return bad_argument("system text is not valid UTF-8");
        };
        match SystemFile::parse_str(text) {
            Ok(file) => {
                *out = Box::into_raw(Box::new(NetredSystem { file }));
                NetredStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a handle created by [`netred_system_from_string`]. Null is a
/// no-op.
///
/// # Safety
/// `sys` must be a handle returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn netred_system_free(sys: *mut NetredSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Reports the agent count, edge count, and per-agent state dimension.
/// Any of the out pointers may be null to skip that field.
///
/// # Safety
/// `sys` must be a live handle; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn netred_system_dims(
    sys: *const NetredSystem,
    n_agents: *mut usize,
    n_edges: *mut usize,
    agent_dim: *mut usize,
) -> NetredStatus {
    guarded(|| {
        let Some(sys) = sys.as_ref() else {
            return bad_argument("null system handle");
        };
        if !n_agents.is_null() {
            *n_agents = sys.file.n_vertices;
        }
        if !n_edges.is_null() {
            *n_edges = sys.file.edges.len();
        }
        if !agent_dim.is_null() {
            *agent_dim = sys.file.agent.dim();
        }
        NetredStatus::Ok
    })
}

unsafe fn labels_partition(
    sys: &NetredSystem,
    labels: *const usize,
    n_labels: usize,
) -> Result<Partition, NetredStatus> {
    if labels.is_null() {
        return Err(bad_argument("null label array"));
    }
    if n_labels != sys.file.n_vertices {
        return Err(bad_argument("label array length must equal the agent count"));
    }
    let labels = std::slice::from_raw_parts(labels, n_labels);
    Partition::from_labels(labels).map_err(|e| fail(&e))
}

fn write_norm(err: &NormError, absolute: *mut f64, relative: *mut f64) {
    unsafe {
        if !absolute.is_null() {
            *absolute = err.absolute;
        }
        if !relative.is_null() {
            *relative = err.relative;
        }
    }
}

/// H2 error of the clustered reduction given by per-agent cluster labels
/// (`labels[i]` is the cluster of agent `i`; values are arbitrary tags).
/// `absolute`/`relative` may each be null to skip that output.
///
/// # Safety
/// `sys` must be a live handle, `labels` must point to `n_labels` readable
/// values, and non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn netred_h2_error(
    sys: *const NetredSystem,
    labels: *const usize,
    n_labels: usize,
    absolute: *mut f64,
    relative: *mut f64,
) -> NetredStatus {
    guarded(|| {
        let Some(sys) = sys.as_ref() else {
            return bad_argument("null system handle");
        };
        let p = match labels_partition(sys, labels, n_labels) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let run = || -> Result<NormError, Error> {
            let lin = sys.file.to_linear()?;
            let red = netred::mas::cluster_reduce(&lin, &p)?;
            netred::stabsep::h2_error(&lin, &red)
        };
        match run() {
            Ok(err) => {
                write_norm(&err, absolute, relative);
                NetredStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// H∞ error of the clustered reduction given by per-agent cluster labels.
/// `tol` is the relative tolerance of the norm search; pass 0 for the
/// default. `absolute`/`relative` may each be null.
///
/// # Safety
/// Same contract as [`netred_h2_error`].
#[no_mangle]
pub unsafe extern "C" fn netred_hinf_error(
    sys: *const NetredSystem,
    labels: *const usize,
    n_labels: usize,
    tol: f64,
    absolute: *mut f64,
    relative: *mut f64,
) -> NetredStatus {
    guarded(|| {
        let Some(sys) = sys.as_ref() else {
            return bad_argument("null system handle");
        };
        let p = match labels_partition(sys, labels, n_labels) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let tol = if tol > 0.0 { tol } else { HINF_TOL };
        let run = || -> Result<NormError, Error> {
            let lin = sys.file.to_linear()?;
            let red = netred::mas::cluster_reduce(&lin, &p)?;
            netred::stabsep::hinf_error(&lin, &red, tol)
        };
        match run() {
            Ok(err) => {
                write_norm(&err, absolute, relative);
                NetredStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs the MOR → clustering pipeline on a linear system and writes the
/// resulting per-agent cluster labels (0-based, by first appearance) to
/// `labels_out`, which must hold one value per agent. `method`, `source`,
/// and `algo` take [`NetredMethod`], [`NetredSource`], and [`NetredAlgo`]
/// values. `h2_relative`/`hinf_relative` may each be null.
///
/// # Safety
/// `sys` must be a live handle, `labels_out` must point to one writable
/// value per agent, and non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn netred_pipeline_partition(
    sys: *const NetredSystem,
    method: u32,
    source: u32,
    algo: u32,
    order: usize,
    clusters: usize,
    seed: u64,
    labels_out: *mut usize,
    h2_relative: *mut f64,
    hinf_relative: *mut f64,
) -> NetredStatus {
    guarded(|| {
        let Some(sys) = sys.as_ref() else {
            return bad_argument("null system handle");
        };
        if labels_out.is_null() {
            return bad_argument("null label output array");
        }
        let method = match method {
            m if m == NetredMethod::Irka as u32 => MorMethod::Irka,
            m if m == NetredMethod::BalancedTruncation as u32 => MorMethod::BalancedTruncation,
            _ => return bad_argument("unknown MOR method"),
        };
        let source = match source {
            s if s == NetredSource::V as u32 => BasisSource::V,
            s if s == NetredSource::W as u32 => BasisSource::W,
            s if s == NetredSource::Vw as u32 => BasisSource::CombinedSvd,
            _ => return bad_argument("unknown basis source"),
        };
        let algo = match algo {
            a if a == NetredAlgo::Qr as u32 => ClusterAlgo::Qr,
            a if a == NetredAlgo::Kmeans as u32 => ClusterAlgo::Kmeans,
            _ => return bad_argument("unknown clustering algorithm"),
        };
        let run = || -> Result<_, Error> {
            let lin = sys.file.to_linear()?;
            let cfg = PipelineConfig {
                order,
                clusters,
                method,
                source,
                algo,
                seed,
            };
            heuristic_pipeline(&lin, &cfg)
        };
        match run() {
            Ok(result) => {
                let labels = result.partition.labels();
                std::ptr::copy_nonoverlapping(labels.as_ptr(), labels_out, labels.len());
                if !h2_relative.is_null() {
                    *h2_relative = result.h2.relative;
                }
                if !hinf_relative.is_null() {
                    *hinf_relative = result.hinf.relative;
                }
                NetredStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
