//! C interface to `hablab`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns a [`HablabStatus`];
//! on failure [`hablab_last_error`] describes what went wrong on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hablab::analysis::find_extinction_threshold;
use hablab::dynamics::{steady_state, Classification, Regime};
use hablab::spectral::mu_principal;
use hablab::{
    build_grid, lambda_degradation, lambda_destruction, DiscreteDomain, EigenResult, Error,
    Landscape, Rate,
};

/// Result codes. Values below 100 mirror the library's error classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HablabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    Parse = 10,
    Geometry = 11,
    InvalidParameter = 12,
    Precondition = 13,
    NonConvergence = 20,
    LinearSolve = 21,
    Unstable = 22,
    NotSignDefinite = 23,
    ClassificationMismatch = 24,
    NotBracketed = 25,
    Io = 30,
    Panic = 100,
}

impl From<&Error> for HablabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => HablabStatus::Parse,
            Error::Geometry(_) => HablabStatus::Geometry,
            Error::InvalidParameter(_) => HablabStatus::InvalidParameter,
            Error::Precondition(_) => HablabStatus::Precondition,
            Error::NonConvergence { .. } => HablabStatus::NonConvergence,
            Error::LinearSolve(_) => HablabStatus::LinearSolve,
            Error::Unstable { .. } => HablabStatus::Unstable,
            Error::NotSignDefinite { .. } => HablabStatus::NotSignDefinite,
            Error::ClassificationMismatch(_) => HablabStatus::ClassificationMismatch,
            Error::NotBracketed(_) => HablabStatus::NotBracketed,
            Error::Io(_) => HablabStatus::Io,
        }
    }
}

/// Opaque landscape handle.
pub struct HablabLandscape(Landscape);

/// Opaque grid handle. Keeps its own copy of the landscape.
pub struct HablabGrid(DiscreteDomain);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HablabThreshold {
    pub exists: bool,
    /// NaN when no threshold exists.
    pub c0: f64,
    pub mu_infinity: f64,
    pub c_star: f64,
    pub iterations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: HablabStatus, msg: impl Into<String>) -> HablabStatus {
    set_error(msg);
    status
}

/// Run `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HablabStatus, String)>) -> HablabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HablabStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(HablabStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> (HablabStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (HablabStatus, String) {
    (HablabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HablabStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (HablabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn rate_from(c: f64) -> Rate {
    if c == f64::INFINITY {
        Rate::Infinite
    } else {
        Rate::Finite(c)
    }
}

/// Copy `values` into an optional caller buffer of length `len`.
unsafe fn copy_values(
    values: &[f64],
    out: *mut f64,
    len: usize,
) -> Result<(), (HablabStatus, String)> {
    if out.is_null() {
        return Ok(());
    }
    if len < values.len() {
        return Err((
            HablabStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn eigen_out(
    r: EigenResult,
    value: *mut f64,
    eigenfunction: *mut f64,
    len: usize,
) -> Result<(), (HablabStatus, String)> {
    copy_values(r.eigenfunction.values(), eigenfunction, len)?;
    write_out(value, r.value, "value")
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn hablab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hablab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a TOML scenario.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hablab_landscape_from_toml(
    toml: *const c_char,
    out: *mut *mut HablabLandscape,
) -> HablabStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| (HablabStatus::InvalidUtf8, e.to_string()))?;
        let l = Landscape::from_toml_str(text).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(HablabLandscape(l))), "out")
    })
}

/// # Safety
/// `l` must come from [`hablab_landscape_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hablab_landscape_free(l: *mut HablabLandscape) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// `(1/|B|) ∫_{Ω∖B} m`, the lower bound for any extinction threshold.
///
/// # Safety
/// `l` must be a live landscape handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hablab_landscape_c_star(
    l: *const HablabLandscape,
    out: *mut f64,
) -> HablabStatus {
    guard(|| {
        let l = deref(l, "landscape")?;
        write_out(out, l.0.c_star().map_err(lib)?, "out")
    })
}

/// # Safety
/// `l` must be a live landscape handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hablab_landscape_fraction_removed(
    l: *const HablabLandscape,
    out: *mut f64,
) -> HablabStatus {
    guard(|| {
        let l = deref(l, "landscape")?;
        write_out(out, l.0.habitat_fraction_removed(), "out")
    })
}

/// Discretize with `nodes_per_axis` nodes along every axis.
///
/// # Safety
/// `l` must be a live landscape handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hablab_grid_new(
    l: *const HablabLandscape,
    nodes_per_axis: usize,
    out: *mut *mut HablabGrid,
) -> HablabStatus {
    guard(|| {
        let l = deref(l, "landscape")?;
        let g = build_grid(&l.0, nodes_per_axis).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(HablabGrid(g))), "out")
    })
}

/// # Safety
/// `g` must come from [`hablab_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hablab_grid_free(g: *mut HablabGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Total node count, 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn hablab_grid_len(g: *const HablabGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.len())
}

/// Node coordinates, `dim` values per node in node order.
///
/// # Safety
/// `g` must be a live grid handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hablab_grid_coords(
    g: *const HablabGrid,
    out: *mut f64,
    len: usize,
) -> HablabStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let coords: Vec<f64> = (0..g.0.len()).flat_map(|i| g.0.coord(i)).collect();
        copy_values(&coords, out, len)
    })
}

/// Principal eigenvalue `μ₁` of `−dΔ − m_c`; `c = INFINITY` selects the
/// destruction problem. The L²-normalized eigenfunction is copied to
/// `eigenfunction` unless it is null.
///
/// # Safety
/// `g` must be a live grid handle, `mu` writable, and `eigenfunction` null or
/// valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hablab_mu(
    g: *const HablabGrid,
    d: f64,
    c: f64,
    mu: *mut f64,
    eigenfunction: *mut f64,
    len: usize,
) -> HablabStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        let r = mu_principal(&g.0, d, rate_from(c)).map_err(lib)?;
        eigen_out(r, mu, eigenfunction, len)
    })
}

/// Positive principal eigenvalue of `Δψ + λ m_c ψ = 0`; `c = INFINITY`
/// selects the problem with the hole removed.
///
/// # Safety
/// As for [`hablab_mu`].
#[no_mangle]
pub unsafe extern "C" fn hablab_lambda(
    g: *const HablabGrid,
    c: f64,
    lambda: *mut f64,
    eigenfunction: *mut f64,
    len: usize,
) -> HablabStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        let r = match rate_from(c) {
            Rate::Finite(c) => lambda_degradation(&g.0, c),
            Rate::Infinite => lambda_destruction(&g.0),
        }
        .map_err(lib)?;
        eigen_out(r, lambda, eigenfunction, len)
    })
}

/// Steady state at rate `c` (`INFINITY` for destruction). `persistent` is set
/// to 1 or 0; the profile is copied to `values` unless it is null.
///
/// # Safety
/// `g` must be a live grid handle, `persistent` writable, and `values` null
/// or valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hablab_steady_state(
    g: *const HablabGrid,
    d: f64,
    c: f64,
    persistent: *mut i32,
    values: *mut f64,
    len: usize,
) -> HablabStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        let ss = steady_state(&g.0, d, Regime::from(rate_from(c))).map_err(lib)?;
        copy_values(ss.field.values(), values, len)?;
        write_out(
            persistent,
            i32::from(ss.classification == Classification::Persistent),
            "persistent",
        )
    })
}

/// Extinction threshold in `c` for diffusion `d`.
///
/// # Safety
/// `g` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hablab_threshold(
    g: *const HablabGrid,
    d: f64,
    out: *mut HablabThreshold,
) -> HablabStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        let r = find_extinction_threshold(&g.0, d).map_err(lib)?;
        write_out(
            out,
            HablabThreshold {
                exists: r.exists,
                c0: r.c0.unwrap_or(f64::NAN),
                mu_infinity: r.mu_infinity,
                c_star: r.c_star_lower_bound,
                iterations: r.iterations,
            },
            "out",
        )
    })
}
