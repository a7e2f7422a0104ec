//! C ABI over the `netcov` library.
//!
//! Objects cross the boundary as opaque handles created by `netcov_*` constructors
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`NetcovStatus`]; on failure a message is available from
//! [`netcov_last_error_message`] on the same thread until the next failing call.
//! Matrices are exchanged row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use netcov::covariance::{network_covariance, CovarianceMethod, KernelKind, KernelSpec, PathOptions};
use netcov::fields::sample_gaussian;
use netcov::io::{parse_grid, read_network, write_network};
use netcov::markov::MarkovSolution;
use netcov::network::{build_network, EdgeMetric};
use netcov::DirectedNetwork;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetcovStatus {
    Ok = 0,
    /// Null pointer, non-UTF-8 text or out-of-range value.
    InvalidArgument = 1,
    /// Malformed input document or failed validation.
    InvalidInput = 2,
    /// Singular system or failed factorization.
    Numerical = 3,
    /// Internal panic caught at the boundary.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetcovKernel {
    Exponential = 0,
    Spherical = 1,
    LinearSill = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetcovMethod {
    ClosedForm = 0,
    PathSum = 1,
}

/// Directed network with its solved Markov chain.
pub struct NetcovNetwork {
    net: DirectedNetwork,
    markov: MarkovSolution,
}

/// Dense matrix of doubles.
pub struct NetcovMatrix {
    inner: DMatrix<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NetcovStatus, msg: impl Into<String>) -> NetcovStatus {
    set_error(msg);
    status
}

fn lib_status(e: netcov::Error) -> NetcovStatus {
    let status = if e.is_numerical() { NetcovStatus::Numerical } else { NetcovStatus::InvalidInput };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> NetcovStatus) -> NetcovStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(NetcovStatus::Internal, "internal panic"),
    }
}

/// # Safety
/// `text` must be null or a valid NUL-terminated string.
unsafe fn text_arg<'a>(text: *const c_char) -> Result<&'a str, NetcovStatus> {
    if text.is_null() {
        return Err(fail(NetcovStatus::InvalidArgument, "null string argument"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| fail(NetcovStatus::InvalidArgument, "string argument is not UTF-8"))
}

fn into_network(net: DirectedNetwork, out: *mut *mut NetcovNetwork) -> NetcovStatus {
    match MarkovSolution::solve(&net) {
        Ok(markov) => {
            // SAFETY: callers check `out` for null before building.
            unsafe { *out = Box::into_raw(Box::new(NetcovNetwork { net, markov })) };
            NetcovStatus::Ok
        }
        Err(e) => lib_status(e.into()),
    }
}

/// Message of the last failure on this thread, or null. Owned by the library;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn netcov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a network from grid CSV text (`ix,iy,x,y,u,v,value[,water]`).
///
/// # Safety
/// `csv` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netcov_network_from_grid_csv(csv: *const c_char, out: *mut *mut NetcovNetwork) -> NetcovStatus {
    guard(|| {
        if out.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null output pointer");
        }
        let text = match text_arg(csv) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let net = parse_grid(text)
            .map_err(netcov::Error::from)
            .and_then(|g| build_network(&g, EdgeMetric::Euclidean).map_err(netcov::Error::from));
        match net {
            Ok(net) => into_network(net, out),
            Err(e) => lib_status(e),
        }
    })
}

/// Parses a network JSON document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netcov_network_from_json(json: *const c_char, out: *mut *mut NetcovNetwork) -> NetcovStatus {
    guard(|| {
        if out.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null output pointer");
        }
        let text = match text_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match read_network(text) {
            Ok(net) => into_network(net, out),
            Err(e) => lib_status(e.into()),
        }
    })
}

/// Serializes a network to JSON. Release the string with [`netcov_string_free`].
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netcov_network_to_json(net: *const NetcovNetwork, out: *mut *mut c_char) -> NetcovStatus {
    guard(|| {
        if net.is_null() || out.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null argument");
        }
        match CString::new(write_network(&(*net).net)) {
            Ok(s) => {
                *out = s.into_raw();
                NetcovStatus::Ok
            }
            Err(_) => fail(NetcovStatus::Internal, "serialized network contains NUL"),
        }
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netcov_network_vertex_count(net: *const NetcovNetwork) -> usize {
    if net.is_null() {
        0
    } else {
        (*net).net.len()
    }
}

/// Network covariance matrix. `max_hops = 0` selects the default hop limit
/// for path enumeration; `weight_floor` prunes low-weight paths.
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netcov_covariance(
    net: *const NetcovNetwork,
    kernel: NetcovKernel,
    sill: f64,
    range: f64,
    method: NetcovMethod,
    max_hops: usize,
    weight_floor: f64,
    out: *mut *mut NetcovMatrix,
) -> NetcovStatus {
    guard(|| {
        if net.is_null() || out.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null argument");
        }
        if weight_floor.is_nan() || weight_floor < 0.0 {
            return fail(NetcovStatus::InvalidArgument, "weight floor must be nonnegative");
        }
        let kind = match kernel {
            NetcovKernel::Exponential => KernelKind::Exponential,
            NetcovKernel::Spherical => KernelKind::Spherical,
            NetcovKernel::LinearSill => KernelKind::LinearSill,
        };
        let method = match method {
            NetcovMethod::ClosedForm => CovarianceMethod::ClosedForm,
            NetcovMethod::PathSum => CovarianceMethod::PathSum,
        };
        let spec = match KernelSpec::new(kind, sill, range) {
            Ok(k) => k,
            Err(e) => return lib_status(e.into()),
        };
        let opts = PathOptions { max_hops: (max_hops > 0).then_some(max_hops), weight_floor };
        let handle = &*net;
        match network_covariance(&handle.net, &handle.markov, &spec, method, &opts) {
            Ok((m, _)) => {
                *out = Box::into_raw(Box::new(NetcovMatrix { inner: m }));
                NetcovStatus::Ok
            }
            Err(e) => lib_status(e.into()),
        }
    })
}

/// Draws `m` realizations of a Gaussian field with constant `mean` and
/// covariance `cov`; the result has one realization per row.
///
/// # Safety
/// `cov` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn netcov_sample_gaussian(
    cov: *const NetcovMatrix,
    mean: f64,
    m: usize,
    seed: u64,
    out: *mut *mut NetcovMatrix,
) -> NetcovStatus {
    guard(|| {
        if cov.is_null() || out.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null argument");
        }
        let c = &(*cov).inner;
        match sample_gaussian(&vec![mean; c.nrows()], c, m, seed) {
            Ok(ens) => {
                *out = Box::into_raw(Box::new(NetcovMatrix { inner: ens.values }));
                NetcovStatus::Ok
            }
            Err(e) => lib_status(e.into()),
        }
    })
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netcov_matrix_rows(m: *const NetcovMatrix) -> usize {
    if m.is_null() {
        0
    } else {
        (*m).inner.nrows()
    }
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn netcov_matrix_cols(m: *const NetcovMatrix) -> usize {
    if m.is_null() {
        0
    } else {
        (*m).inner.ncols()
    }
}

/// Copies the matrix row-major into `buf`, which must hold `len >= rows * cols` doubles.
///
/// # Safety
/// `m` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn netcov_matrix_copy(m: *const NetcovMatrix, buf: *mut f64, len: usize) -> NetcovStatus {
    guard(|| {
        if m.is_null() || buf.is_null() {
            return fail(NetcovStatus::InvalidArgument, "null argument");
        }
        let inner = &(*m).inner;
        let need = inner.nrows() * inner.ncols();
        if len < need {
            return fail(NetcovStatus::InvalidArgument, format!("buffer holds {len} values, {need} needed"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for i in 0..inner.nrows() {
            for j in 0..inner.ncols() {
                dst[i * inner.ncols() + j] = inner[(i, j)];
            }
        }
        NetcovStatus::Ok
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netcov_network_free(net: *mut NetcovNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netcov_matrix_free(m: *mut NetcovMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netcov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
