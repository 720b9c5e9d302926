//! C ABI for the isospec library.
//!
//! Complexes and spectra are opaque handles created by `iso_*_new`/`load`
//! functions and released with the matching `free`. Every fallible call
//! returns an `IsoStatus`; the message of the last failure on the calling
//! thread is available from `iso_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

use isospec::enumerate::Realization;
use isospec::geometry::solve_block;
use isospec::spectrum::{build_spectrum, compare, LengthSpectrum, Mode};
use isospec::{BlockComplex, Error};

/// Result codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownComplex = 3,
    InvalidComplex = 4,
    InvalidMetric = 5,
    Geometry = 6,
    OutOfRange = 7,
    Mismatch = 8,
    Internal = 9,
}

/// A complex together with its solved block geometry.
pub struct IsoComplex {
    inner: Realization,
}

/// A banded length spectrum.
pub struct IsoSpectrum {
    inner: LengthSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: IsoStatus, msg: impl Into<String>) -> IsoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn status_of(e: &Error) -> IsoStatus {
    match e {
        Error::Metric { .. } => IsoStatus::InvalidMetric,
        Error::NonHyperbolic { .. } | Error::AxisMiss { .. } | Error::BranchAngleViolation { .. } | Error::ClosureFailure(_) => {
            IsoStatus::Geometry
        }
        Error::CutoffMismatch(..) => IsoStatus::Mismatch,
        Error::Io(_) => IsoStatus::Internal,
        _ => IsoStatus::InvalidComplex,
    }
}

fn from_error(e: Error) -> IsoStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Run `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> IsoStatus) -> IsoStatus {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| fail(IsoStatus::Internal, "internal panic"))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, IsoStatus> {
    if s.is_null() {
        return Err(fail(IsoStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(IsoStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn emit_complex(cx: BlockComplex, out: *mut *mut IsoComplex) -> IsoStatus {
    match Realization::new(cx) {
        Ok(r) => {
            *out = Box::into_raw(Box::new(IsoComplex { inner: r }));
            IsoStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn iso_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Load one of the bundled complexes by name ("s1", "x1_triple", ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_load_bundled(name: *const c_char, out: *mut *mut IsoComplex) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return fail(IsoStatus::NullPointer, "null output pointer");
        }
        let name = match text(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match isospec::bundled_text(name) {
            None => fail(IsoStatus::UnknownComplex, format!("no bundled complex named {name}")),
            Some(t) => match BlockComplex::load(t) {
                Ok(cx) => emit_complex(cx, out),
                Err(e) => from_error(e),
            },
        }
    })
}

/// Load a complex from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_load_json(json: *const c_char, out: *mut *mut IsoComplex) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return fail(IsoStatus::NullPointer, "null output pointer");
        }
        let json = match text(json) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match BlockComplex::load(json) {
            Ok(cx) => emit_complex(cx, out),
            Err(e) => from_error(e),
        }
    })
}

/// Change the block parameters of a complex in place.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_set_metric(h: *mut IsoComplex, b: f64, c: f64) -> IsoStatus {
    guard(|| {
        let Some(h) = h.as_mut() else { return fail(IsoStatus::NullPointer, "null complex") };
        match h.inner.cx().with_metric(b, c).and_then(Realization::new) {
            Ok(r) => {
                h.inner = r;
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a complex. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_free(h: *mut IsoComplex) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Euler characteristic of the complex.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_euler(h: *const IsoComplex, out: *mut i64) -> IsoStatus {
    let (Some(h), false) = (h.as_ref(), out.is_null()) else { return fail(IsoStatus::NullPointer, "null argument") };
    *out = h.inner.cx().euler_characteristic();
    IsoStatus::Ok
}

/// Number of chambers of an amalgam.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_complex_chambers(h: *const IsoComplex, out: *mut usize) -> IsoStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else { return fail(IsoStatus::NullPointer, "null argument") };
        match h.inner.cx().chambers() {
            Ok(c) => {
                *out = c.len();
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Length of the a-sides of the right-angled octagon with parameters (b, c).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_octagon_a(b: f64, c: f64, out: *mut f64) -> IsoStatus {
    if out.is_null() {
        return fail(IsoStatus::NullPointer, "null output pointer");
    }
    match solve_block(b, c) {
        Ok(g) => {
            *out = g.a;
            IsoStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Length spectrum up to `cutoff`, banded with tolerance `tol`.
/// `max_crossings` = 0 selects ceil(cutoff / c).
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_spectrum_build(
    h: *const IsoComplex,
    cutoff: f64,
    tol: f64,
    max_crossings: usize,
    out: *mut *mut IsoSpectrum,
) -> IsoStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else { return fail(IsoStatus::NullPointer, "null argument") };
        if !(cutoff.is_finite() && cutoff > 0.0 && tol.is_finite() && tol > 0.0) {
            return fail(IsoStatus::OutOfRange, "cutoff and tolerance must be positive");
        }
        let n = (max_crossings > 0).then_some(max_crossings);
        *out = Box::into_raw(Box::new(IsoSpectrum { inner: build_spectrum(&h.inner, cutoff, tol, n) }));
        IsoStatus::Ok
    })
}

/// Number of bands.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_spectrum_len(s: *const IsoSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.inner.bands.len())
}

/// Length and multiplicity of band `i`.
///
/// # Safety
/// `s` must be a live handle; `length` and `multiplicity` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn iso_spectrum_band(s: *const IsoSpectrum, i: usize, length: *mut f64, multiplicity: *mut usize) -> IsoStatus {
    let (Some(s), false, false) = (s.as_ref(), length.is_null(), multiplicity.is_null()) else {
        return fail(IsoStatus::NullPointer, "null argument");
    };
    match s.inner.bands.get(i) {
        Some(b) => {
            *length = b.length;
            *multiplicity = b.multiplicity;
            IsoStatus::Ok
        }
        None => fail(IsoStatus::OutOfRange, format!("band {i} of {}", s.inner.bands.len())),
    }
}

/// Whether two spectra agree, with multiplicities (`weak` = 0) or as sets.
///
/// # Safety
/// `a`, `b` must be live handles and `equal` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iso_spectrum_compare(a: *const IsoSpectrum, b: *const IsoSpectrum, weak: bool, equal: *mut bool) -> IsoStatus {
    let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), equal.is_null()) else {
        return fail(IsoStatus::NullPointer, "null argument");
    };
    match compare(&a.inner, &b.inner, if weak { Mode::Weak } else { Mode::Full }) {
        Ok(c) => {
            *equal = c.equal;
            IsoStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Release a spectrum. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_spectrum_free(s: *mut IsoSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
