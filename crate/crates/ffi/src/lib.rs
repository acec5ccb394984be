//! C interface to the `tfcorr` solvers.
//!
//! Every function returns a `TfcStatus`. On failure the message is kept per
//! thread and can be read with `tfc_last_error_message`. Handles are opaque
//! and must be released with the matching `_free` function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tfcorr::atom_energy::atom_correlation;
use tfcorr::constants::all_reports;
use tfcorr::dot_energy::dot_energy_from;
use tfcorr::numerics::QuadratureSpec;
use tfcorr::tf::{solve_tf_atom, solve_tf_dot_radial, tf_energy, ConfinementSpec, RadialGrid, ScalingContext};
use tfcorr::tf::{TFAtomSolution, TFDotSolution};

/// Status codes. The numeric values of the library errors match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfcStatus {
    Ok = 0,
    /// Invalid argument or input data.
    Invalid = 2,
    /// Solver or quadrature did not converge.
    Numerical = 3,
    Io = 4,
    NullPointer = 5,
    /// Caller buffer too small.
    Buffer = 6,
    /// Internal panic; the message holds the payload.
    Panic = 7,
}

/// Solved Thomas-Fermi atom or ion.
pub struct TfcAtom(TFAtomSolution);

/// Solved Thomas-Fermi dot.
pub struct TfcDot(TFDotSolution);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfcAtomSummary {
    pub q: f64,
    pub mu_global: f64,
    /// NaN for the neutral atom.
    pub support_radius: f64,
    /// Coefficient of `r⁻⁴` in the tail; NaN for ions.
    pub tail_coeff: f64,
    pub origin_coeff: f64,
    pub residual: f64,
    pub normalization: f64,
    pub grid_len: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfcAtomCorrelation {
    pub a_value: f64,
    /// NaN when the `B` integral does not converge.
    pub b_value: f64,
    pub ec2_integral: f64,
    /// Per-electron hartree terms.
    pub log_term: f64,
    pub const_base: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub x_unknown: f64,
    pub ec2_const: f64,
    pub ec2_term: f64,
    /// `−Ē_c` in hartree.
    pub total_hartree: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfcDotSummary {
    pub mu_global: f64,
    pub support_radius: f64,
    pub w_prime_at_r: f64,
    pub residual: f64,
    pub normalization: f64,
    pub e_tf: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfcDotEnergy {
    pub n: f64,
    pub e_tf: f64,
    pub exchange_term: f64,
    pub laplacian_term: f64,
    pub delta_term: f64,
    pub screening_residual: f64,
    pub corr_const: f64,
    pub corr_integral: f64,
    pub total: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(TfcStatus, String);

impl From<tfcorr::Error> for Failure {
    fn from(e: tfcorr::Error) -> Self {
        let status = match e.exit_code() {
            3 => TfcStatus::Numerical,
            4 => TfcStatus::Io,
            _ => TfcStatus::Invalid,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TfcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TfcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            TfcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(TfcStatus::Invalid, format!("{what} is not UTF-8")))
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tfc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tfc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solves the atom (`q = 1`) or a positive ion (`0 < q < 1`) on a logarithmic
/// grid of `grid_nodes` points in `[r_min, r_max]`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_solve(
    q: f64,
    grid_nodes: usize,
    r_min: f64,
    r_max: f64,
    tol: f64,
    out_atom: *mut *mut TfcAtom,
) -> TfcStatus {
    guard(|| {
        let slot = out(out_atom, "out_atom")?;
        *slot = ptr::null_mut();
        let grid = RadialGrid::logarithmic(r_min, r_max, grid_nodes)?;
        let sol = solve_tf_atom(q, &grid, tol)?;
        *slot = Box::into_raw(Box::new(TfcAtom(sol)));
        Ok(())
    })
}

/// # Safety
/// `atom` must be null or a handle from `tfc_atom_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_free(atom: *mut TfcAtom) {
    if !atom.is_null() {
        drop(Box::from_raw(atom));
    }
}

/// # Safety
/// `atom` must be a live handle and `summary` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_summary(atom: *const TfcAtom, summary: *mut TfcAtomSummary) -> TfcStatus {
    guard(|| {
        let s = &deref(atom, "atom")?.0;
        *out(summary, "summary")? = TfcAtomSummary {
            q: s.q,
            mu_global: s.mu_global,
            support_radius: nan_if_none(s.support_radius),
            tail_coeff: nan_if_none(s.tail_coeff),
            origin_coeff: s.origin_coeff,
            residual: s.residual,
            normalization: s.normalization(),
            grid_len: s.grid.len(),
        };
        Ok(())
    })
}

/// `μ₊(r)` of a solved atom.
///
/// # Safety
/// `atom` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_mu_plus(atom: *const TfcAtom, r: f64, value: *mut f64) -> TfcStatus {
    guard(|| {
        let s = &deref(atom, "atom")?.0;
        if !(r >= 0.0) {
            return Err(Failure(TfcStatus::Invalid, format!("radius must be >= 0, got {r}")));
        }
        *out(value, "value")? = s.mu_plus_at(r);
        Ok(())
    })
}

/// Copies the grid and `μ₊` samples. Both arrays need `grid_len` entries.
///
/// # Safety
/// `r` and `mu` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_profile(atom: *const TfcAtom, r: *mut f64, mu: *mut f64, len: usize) -> TfcStatus {
    guard(|| {
        let s = &deref(atom, "atom")?.0;
        if r.is_null() || mu.is_null() {
            return Err(null("output array"));
        }
        let n = s.grid.len();
        if len < n {
            return Err(Failure(TfcStatus::Buffer, format!("profile needs {n} entries, got {len}")));
        }
        ptr::copy_nonoverlapping(s.grid.nodes().as_ptr(), r, n);
        ptr::copy_nonoverlapping(s.mu_plus.as_ptr(), mu, n);
        Ok(())
    })
}

/// Thomas-Fermi energy of the neutral atom per `Z^{7/3}`, in hartree.
///
/// # Safety
/// `atom` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_energy_hartree(atom: *const TfcAtom, value: *mut f64) -> TfcStatus {
    guard(|| {
        let s = &deref(atom, "atom")?.0;
        let ctx = ScalingContext::atom(1.0, s.q)?;
        let e = tf_energy(s, s.q, &ctx)?;
        *out(value, "value")? =
            e.hartree.ok_or_else(|| Failure(TfcStatus::Invalid, "no hartree unit for this context".into()))?;
        Ok(())
    })
}

/// Correlation energy breakdown of a neutral atom with `n` electrons.
///
/// # Safety
/// `atom` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_atom_correlation(
    atom: *const TfcAtom,
    n: f64,
    x_unknown: f64,
    result: *mut TfcAtomCorrelation,
) -> TfcStatus {
    guard(|| {
        let s = &deref(atom, "atom")?.0;
        let slot = out(result, "result")?;
        let b = atom_correlation(n, n, x_unknown, s, &QuadratureSpec::default())?;
        let h = &b.per_electron_hartree;
        *slot = TfcAtomCorrelation {
            a_value: b.a_value,
            b_value: nan_if_none(b.b_value),
            ec2_integral: b.ec2_integral,
            log_term: h.log_term,
            const_base: h.const_base,
            x_a: h.x_a,
            x_b: nan_if_none(h.x_b),
            x_unknown: h.x_unknown,
            ec2_const: h.ec2_const,
            ec2_term: h.ec2_integral,
            total_hartree: b.total_hartree,
        };
        Ok(())
    })
}

/// Solves a dot in the confinement `potential` (`r^2`, `r^4`, `r^p:<p>`,
/// `<c>*r^p:<p>` or `file:<csv>`).
///
/// # Safety
/// `potential` must be a NUL-terminated string and `out_dot` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_dot_solve(potential: *const c_char, tol: f64, out_dot: *mut *mut TfcDot) -> TfcStatus {
    guard(|| {
        let slot = out(out_dot, "out_dot")?;
        *slot = ptr::null_mut();
        let conf = ConfinementSpec::parse(c_str(potential, "potential")?)?;
        let sol = solve_tf_dot_radial(&conf, tol)?;
        *slot = Box::into_raw(Box::new(TfcDot(sol)));
        Ok(())
    })
}

/// # Safety
/// `dot` must be null or a handle from `tfc_dot_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfc_dot_free(dot: *mut TfcDot) {
    if !dot.is_null() {
        drop(Box::from_raw(dot));
    }
}

/// # Safety
/// `dot` must be a live handle and `summary` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_dot_summary(dot: *const TfcDot, summary: *mut TfcDotSummary) -> TfcStatus {
    guard(|| {
        let s = &deref(dot, "dot")?.0;
        let slot = out(summary, "summary")?;
        let e = tf_energy(s, 1.0, &ScalingContext::dot(1.0)?)?;
        *slot = TfcDotSummary {
            mu_global: s.mu_global,
            support_radius: s.support_radius,
            w_prime_at_r: s.w_prime_at_r,
            residual: s.residual,
            normalization: s.normalization(),
            e_tf: e.scaled,
        };
        Ok(())
    })
}

/// # Safety
/// `dot` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_dot_mu_plus(dot: *const TfcDot, r: f64, value: *mut f64) -> TfcStatus {
    guard(|| {
        let s = &deref(dot, "dot")?.0;
        if !(r >= 0.0) {
            return Err(Failure(TfcStatus::Invalid, format!("radius must be >= 0, got {r}")));
        }
        *out(value, "value")? = s.mu_plus_at(r);
        Ok(())
    })
}

/// Smooth energy breakdown for `n` electrons in a solved dot.
///
/// # Safety
/// `dot` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_dot_energy(dot: *const TfcDot, n: f64, tol: f64, result: *mut TfcDotEnergy) -> TfcStatus {
    guard(|| {
        let s = &deref(dot, "dot")?.0;
        let slot = out(result, "result")?;
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Failure(TfcStatus::Invalid, format!("electron count must be >= 1, got {n}")));
        }
        let b = dot_energy_from(n, s, tol)?;
        *slot = TfcDotEnergy {
            n,
            e_tf: b.e_tf,
            exchange_term: b.exchange_term,
            laplacian_term: b.laplacian_term,
            delta_term: b.delta_term,
            screening_residual: b.screening_residual,
            corr_const: b.corr_const,
            corr_integral: b.corr_integral,
            total: b.total,
        };
        Ok(())
    })
}

/// All constant reports as a JSON array. The string is owned by the library
/// and released with `tfc_string_free`.
///
/// # Safety
/// `json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfc_constants_json(seed: u64, mc_samples: usize, json: *mut *mut c_char) -> TfcStatus {
    guard(|| {
        let slot = out(json, "json")?;
        *slot = ptr::null_mut();
        let mut spec = QuadratureSpec::default().with_seed(seed);
        if mc_samples > 0 {
            spec = spec.with_samples(mc_samples);
        }
        spec.validate()?;
        let reports = all_reports(&spec)?;
        let text = serde_json::to_string(&reports).map_err(|e| Failure(TfcStatus::Invalid, e.to_string()))?;
        *slot = CString::new(text).map_err(|e| Failure(TfcStatus::Invalid, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
