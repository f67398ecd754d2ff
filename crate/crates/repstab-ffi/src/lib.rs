//! C ABI for the repstab library.
//!
//! Conventions:
//! * every constructor writes through an out-pointer and returns a
//!   [`RepstabStatus`]; non-zero means failure and `*out` is untouched,
//! * handles are opaque and freed by the matching `_free` function,
//! * rich results come back as JSON strings allocated by this library and
//!   released with [`repstab_string_free`],
//! * on failure, [`repstab_last_error_message`] returns a thread-local
//!   message valid until the next call on the same thread.
//!
//! The matching header lives in `include/repstab.h`; `cbindgen.toml` holds
//! the configuration used to regenerate it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use repstab::fourier::{u2_norm4_direct, u2_norm4_fourier, MatrixFn, MatrixFnFile};
use repstab::group::{build_group_str, FiniteGroup};
use repstab::inverse::inverse_theorem;
use repstab::irreps::{decompose_irreps, IrrepTable};
use repstab::stability::{defect, stabilize_with, DefectFlavor, StabilizeOptions};
use repstab::uniqueness::eps_unitary_intertwiner;
use repstab::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepstabStatus {
    RepstabOk = 0,
    RepstabNullPointer = 1,
    RepstabInvalidArgument = 2,
    RepstabInvalidSpec = 3,
    RepstabPrecondition = 4,
    RepstabNumerical = 5,
    RepstabIo = 6,
    RepstabUtf8 = 7,
    RepstabPanic = 8,
}

pub struct RepstabGroup(Arc<FiniteGroup>);
pub struct RepstabMatrixFn(MatrixFn);
pub struct RepstabIrrepTable(IrrepTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RepstabStatus {
    match err {
        Error::InvalidSpec(_) => RepstabStatus::RepstabInvalidSpec,
        Error::GroupValidation(_) => RepstabStatus::RepstabInvalidSpec,
        Error::GroupMismatch(_) | Error::ShapeMismatch(_) | Error::BadParameter(_) => {
            RepstabStatus::RepstabInvalidArgument
        }
        Error::Precondition(_) | Error::IncompleteTable { .. } => {
            RepstabStatus::RepstabPrecondition
        }
        Error::NonConvergence(_) => RepstabStatus::RepstabNumerical,
        Error::Io(_) => RepstabStatus::RepstabIo,
        Error::Json(_) => RepstabStatus::RepstabInvalidArgument,
    }
}

fn fail(err: Error) -> RepstabStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

fn guarded(body: impl FnOnce() -> RepstabStatus) -> RepstabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in repstab".to_string());
            set_error(&msg);
            RepstabStatus::RepstabPanic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated C string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RepstabStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(RepstabStatus::RepstabNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        RepstabStatus::RepstabUtf8
    })
}

fn emit_string(out: *mut *mut c_char, text: String) -> RepstabStatus {
    match CString::new(text.replace('\0', " ")) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            RepstabStatus::RepstabOk
        }
        Err(_) => {
            set_error("result contained an interior NUL");
            RepstabStatus::RepstabNumerical
        }
    }
}

macro_rules! require_nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error("null pointer argument");
            return RepstabStatus::RepstabNullPointer;
        }
    };
}

/// Thread-local message describing the most recent failure on this thread.
/// Valid until the next repstab call from the same thread.
#[no_mangle]
pub extern "C" fn repstab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned through a `char**` out
/// parameter of this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn repstab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a validated group from a spec string such as "quaternion" or
/// "product(cyclic:2,symmetric:3)".
///
/// # Safety
/// `spec` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_group_build(
    spec: *const c_char,
    out: *mut *mut RepstabGroup,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(out);
        let spec = match read_str(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match build_group_str(spec) {
            Ok(group) => {
                *out = Box::into_raw(Box::new(RepstabGroup(group)));
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Group order; 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle from `repstab_group_build`.
#[no_mangle]
pub unsafe extern "C" fn repstab_group_order(group: *const RepstabGroup) -> usize {
    if group.is_null() {
        return 0;
    }
    (*group).0.order()
}

/// # Safety
/// `group` must be null or a handle from `repstab_group_build`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn repstab_group_free(group: *mut RepstabGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Parses a MatrixFn from its JSON wire form
/// { "group": spec, "n": n, "values": [matrix, ...] }.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_matrixfn_load_json(
    json: *const c_char,
    out: *mut *mut RepstabMatrixFn,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(out);
        let text = match read_str(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let file: MatrixFnFile = match serde_json::from_str(text) {
            Ok(f) => f,
            Err(e) => return fail(Error::Json(e)),
        };
        match file.build() {
            Ok(f) => {
                *out = Box::into_raw(Box::new(RepstabMatrixFn(f)));
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a MatrixFn from a JSON file on disk.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_matrixfn_load_file(
    path: *const c_char,
    out: *mut *mut RepstabMatrixFn,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(out);
        let path = match read_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match MatrixFn::load(Path::new(path)) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(RepstabMatrixFn(f)));
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes a MatrixFn back to its JSON wire form.
///
/// # Safety
/// `f` must be a live handle; `out` a valid slot for the string.
#[no_mangle]
pub unsafe extern "C" fn repstab_matrixfn_to_json(
    f: *const RepstabMatrixFn,
    out: *mut *mut c_char,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(f);
        require_nonnull!(out);
        let file = MatrixFnFile::from(&(*f).0);
        match serde_json::to_string(&file) {
            Ok(text) => emit_string(out, text),
            Err(e) => fail(Error::Json(e)),
        }
    })
}

/// Matrix dimension n; 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle from a matrixfn constructor.
#[no_mangle]
pub unsafe extern "C" fn repstab_matrixfn_dim(f: *const RepstabMatrixFn) -> usize {
    if f.is_null() {
        return 0;
    }
    (*f).0.n()
}

/// # Safety
/// `f` must be null or a handle from a matrixfn constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn repstab_matrixfn_free(f: *mut RepstabMatrixFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Decomposes the regular representation; deterministic for a fixed seed.
///
/// # Safety
/// `group` must be a live handle; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_irreps_compute(
    group: *const RepstabGroup,
    seed: u64,
    out: *mut *mut RepstabIrrepTable,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(group);
        require_nonnull!(out);
        match decompose_irreps(&(*group).0, seed) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(RepstabIrrepTable(table)));
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of irreps in the table; 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle from `repstab_irreps_compute`.
#[no_mangle]
pub unsafe extern "C" fn repstab_irrep_table_len(table: *const RepstabIrrepTable) -> usize {
    if table.is_null() {
        return 0;
    }
    (*table).0.irreps().len()
}

/// Dimension of the idx-th irrep; 0 when idx is out of range.
///
/// # Safety
/// `table` must be null or a live handle from `repstab_irreps_compute`.
#[no_mangle]
pub unsafe extern "C" fn repstab_irrep_table_dim(
    table: *const RepstabIrrepTable,
    idx: usize,
) -> usize {
    if table.is_null() {
        return 0;
    }
    (*table).0.irreps().get(idx).map_or(0, |r| r.dim())
}

/// Schur delta residual certifying completeness; NaN for a null handle.
///
/// # Safety
/// `table` must be null or a live handle from `repstab_irreps_compute`.
#[no_mangle]
pub unsafe extern "C" fn repstab_irrep_table_schur_residual(
    table: *const RepstabIrrepTable,
) -> f64 {
    if table.is_null() {
        return f64::NAN;
    }
    (*table).0.certificate().schur_delta
}

/// # Safety
/// `table` must be null or a handle from `repstab_irreps_compute`.
#[no_mangle]
pub unsafe extern "C" fn repstab_irrep_table_free(table: *mut RepstabIrrepTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Fourth power of the U² norm. Pass a table to use the Fourier route
/// (required for groups of order above the direct-path cap); pass NULL to
/// average over the constrained quadruples directly.
///
/// # Safety
/// `f` must be a live handle, `table` null or a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn repstab_u2_norm4(
    f: *const RepstabMatrixFn,
    table: *const RepstabIrrepTable,
    out: *mut f64,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(f);
        require_nonnull!(out);
        let result = if table.is_null() {
            u2_norm4_direct(&(*f).0)
        } else {
            u2_norm4_fourier(&(*f).0, &(*table).0)
        };
        match result {
            Ok(v) => {
                *out = v;
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact defect maximum; `affine` selects the quadruple flavor and
/// `relaxed` admits non-unitary contractions.
///
/// # Safety
/// `f` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn repstab_defect(
    f: *const RepstabMatrixFn,
    affine: i32,
    p: f64,
    relaxed: i32,
    out: *mut f64,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(f);
        require_nonnull!(out);
        let flavor = if affine != 0 { DefectFlavor::Affine } else { DefectFlavor::Multiplicative };
        match defect(&(*f).0, flavor, p, relaxed != 0) {
            Ok(v) => {
                *out = v;
                RepstabStatus::RepstabOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the inverse theorem at threshold c and returns a JSON payload
/// {"m", "correlation", "tau4_bound", "m_window", "u", "v", "p"}.
///
/// # Safety
/// `f` and `table` must be live handles; `out` a valid string slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_inverse_theorem_json(
    f: *const RepstabMatrixFn,
    table: *const RepstabIrrepTable,
    c: f64,
    out: *mut *mut c_char,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(f);
        require_nonnull!(table);
        require_nonnull!(out);
        match inverse_theorem(&(*f).0, &(*table).0, c) {
            Ok(res) => {
                let payload = serde_json::json!({
                    "c": c,
                    "m": res.m,
                    "correlation": res.correlation,
                    "tau4_bound": res.tau4_bound,
                    "m_window": [res.m_window.0, res.m_window.1],
                    "u": repstab::cmatrix::MatrixJson::from(&res.rep.u),
                    "v": repstab::cmatrix::MatrixJson::from(&res.rep.v),
                    "p": MatrixFnFile::from(&res.rep.p),
                });
                emit_string(out, payload.to_string())
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the stabilization pipeline and returns the report JSON
/// {"epsilon","p","m","n","bound","max_distance","per_element","window","passed"}.
///
/// # Safety
/// `f` and `table` must be live handles; `out` a valid string slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_stabilize_json(
    f: *const RepstabMatrixFn,
    table: *const RepstabIrrepTable,
    p: f64,
    affine: i32,
    relaxed: i32,
    force: i32,
    out: *mut *mut c_char,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(f);
        require_nonnull!(table);
        require_nonnull!(out);
        let opts = StabilizeOptions {
            affine: affine != 0,
            relaxed: relaxed != 0,
            force: force != 0,
            c_override: None,
        };
        match stabilize_with(&(*f).0, &(*table).0, p, opts) {
            Ok(res) => match serde_json::to_string(&res.report) {
                Ok(text) => emit_string(out, text),
                Err(e) => fail(Error::Json(e)),
            },
            Err(e) => fail(e),
        }
    })
}

/// Certifies approximate uniqueness for two nearby representations and
/// returns {"epsilon","common_dim","t_prime_dist","three_eps",
/// "intertwining_residual","cluster_gap_ratio"}.
///
/// # Safety
/// `rho` and `sigma` must be live handles; `out` a valid string slot.
#[no_mangle]
pub unsafe extern "C" fn repstab_uniqueness_json(
    rho: *const RepstabMatrixFn,
    sigma: *const RepstabMatrixFn,
    p: f64,
    out: *mut *mut c_char,
) -> RepstabStatus {
    guarded(|| {
        require_nonnull!(rho);
        require_nonnull!(sigma);
        require_nonnull!(out);
        match eps_unitary_intertwiner(&(*rho).0, &(*sigma).0, p) {
            Ok(res) => {
                let payload = serde_json::json!({
                    "epsilon": res.epsilon,
                    "common_dim": res.common_dim,
                    "t_prime_dist": res.t_prime_dist,
                    "three_eps": 3.0 * res.epsilon,
                    "intertwining_residual": res.intertwining_residual,
                    "cluster_gap_ratio": res.cluster_gap_ratio,
                });
                emit_string(out, payload.to_string())
            }
            Err(e) => fail(e),
        }
    })
}
