//! Exercises the C ABI the way a foreign binding would: through raw
//! pointers, status codes and JSON payloads.

use std::ffi::{CStr, CString};
use std::ptr;

use repstab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(repstab_last_error_message()).to_string_lossy().into_owned() }
}

fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let text = unsafe { CStr::from_ptr(ptr).to_string_lossy().into_owned() };
    unsafe { repstab_string_free(ptr) };
    text
}

fn build_group(spec: &str) -> *mut RepstabGroup {
    let spec = CString::new(spec).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { repstab_group_build(spec.as_ptr(), &mut out) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    out
}

/// A 1x1 function on cyclic:4 whose values are the fourth roots of unity:
/// the faithful character, a genuine representation.
fn character_fn_json() -> String {
    let values: Vec<String> = (0..4)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / 4.0;
            format!(
                r#"{{"rows":1,"cols":1,"entries":[[{},{}]]}}"#,
                theta.cos(),
                theta.sin()
            )
        })
        .collect();
    format!(r#"{{"group":"cyclic:4","n":1,"values":[{}]}}"#, values.join(","))
}

fn load_fn(json: &str) -> *mut RepstabMatrixFn {
    let json = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { repstab_matrixfn_load_json(json.as_ptr(), &mut out) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    out
}

#[test]
fn group_lifecycle_and_errors() {
    let g = build_group("quaternion");
    assert_eq!(unsafe { repstab_group_order(g) }, 8);
    unsafe { repstab_group_free(g) };

    // bad spec reports InvalidSpec with a message
    let bad = CString::new("octonion").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { repstab_group_build(bad.as_ptr(), &mut out) };
    assert_eq!(status, RepstabStatus::RepstabInvalidSpec);
    assert!(last_error().contains("octonion"));
    assert!(out.is_null());

    // null arguments are refused, not dereferenced
    let status = unsafe { repstab_group_build(ptr::null(), &mut out) };
    assert_eq!(status, RepstabStatus::RepstabNullPointer);
    assert_eq!(unsafe { repstab_group_order(ptr::null()) }, 0);
}

#[test]
fn irrep_table_accessors() {
    let g = build_group("quaternion");
    let mut table = ptr::null_mut();
    let status = unsafe { repstab_irreps_compute(g, 1, &mut table) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    assert_eq!(unsafe { repstab_irrep_table_len(table) }, 5);
    let mut dims: Vec<usize> =
        (0..5).map(|i| unsafe { repstab_irrep_table_dim(table, i) }).collect();
    dims.sort_unstable();
    assert_eq!(dims, vec![1, 1, 1, 1, 2]);
    assert_eq!(unsafe { repstab_irrep_table_dim(table, 99) }, 0);
    assert!(unsafe { repstab_irrep_table_schur_residual(table) } < 1e-6);
    unsafe {
        repstab_irrep_table_free(table);
        repstab_group_free(g);
    }
}

#[test]
fn matrixfn_roundtrip_and_u2() {
    let f = load_fn(&character_fn_json());
    assert_eq!(unsafe { repstab_matrixfn_dim(f) }, 1);

    // serialize back and reparse
    let mut text_out = ptr::null_mut();
    let status = unsafe { repstab_matrixfn_to_json(f, &mut text_out) };
    assert_eq!(status, RepstabStatus::RepstabOk);
    let text = take_string(text_out);
    let f2 = load_fn(&text);

    // a character has U2 fourth power 1, both routes
    let mut direct = 0.0;
    let status = unsafe { repstab_u2_norm4(f, ptr::null(), &mut direct) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    assert!((direct - 1.0).abs() < 1e-9);

    let g = build_group("cyclic:4");
    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { repstab_irreps_compute(g, 0, &mut table) },
        RepstabStatus::RepstabOk
    );
    let mut viaf = 0.0;
    let status = unsafe { repstab_u2_norm4(f2, table, &mut viaf) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    assert!((viaf - 1.0).abs() < 1e-9);

    // zero defect for a genuine representation
    let mut eps = f64::NAN;
    let status = unsafe { repstab_defect(f, 0, 2.0, 0, &mut eps) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    assert!(eps < 1e-12);

    unsafe {
        repstab_irrep_table_free(table);
        repstab_group_free(g);
        repstab_matrixfn_free(f);
        repstab_matrixfn_free(f2);
    }
}

#[test]
fn inverse_and_stabilize_payloads() {
    let f = load_fn(&character_fn_json());
    let g = build_group("cyclic:4");
    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { repstab_irreps_compute(g, 0, &mut table) },
        RepstabStatus::RepstabOk
    );

    let mut out = ptr::null_mut();
    let status = unsafe { repstab_inverse_theorem_json(f, table, 0.9, &mut out) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    let payload: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(payload["m"], 1);
    assert!(payload["correlation"].as_f64().unwrap() > 0.99);

    let mut out = ptr::null_mut();
    let status = unsafe { repstab_stabilize_json(f, table, 2.0, 0, 0, 0, &mut out) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(report["n"], 1);
    assert_eq!(report["passed"], true);
    assert!(report["max_distance"].as_f64().unwrap() < 1e-7);

    let mut out = ptr::null_mut();
    let status = unsafe { repstab_uniqueness_json(f, f, 2.0, &mut out) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    let uniq: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(uniq["common_dim"], 1);
    assert!(uniq["epsilon"].as_f64().unwrap() < 1e-12);

    unsafe {
        repstab_irrep_table_free(table);
        repstab_group_free(g);
        repstab_matrixfn_free(f);
    }
}

#[test]
fn precondition_failures_surface_as_status_codes() {
    // constant non-unitary function: strict defect is refused
    let json = r#"{"group":"cyclic:2","n":1,"values":[
        {"rows":1,"cols":1,"entries":[[0.5,0.0]]},
        {"rows":1,"cols":1,"entries":[[0.5,0.0]]}]}"#;
    let f = load_fn(json);
    let mut eps = 0.0;
    let status = unsafe { repstab_defect(f, 0, 2.0, 0, &mut eps) };
    assert_eq!(status, RepstabStatus::RepstabPrecondition);
    assert!(last_error().contains("unitary"));
    // relaxed mode accepts it
    let status = unsafe { repstab_defect(f, 0, 2.0, 1, &mut eps) };
    assert_eq!(status, RepstabStatus::RepstabOk, "{}", last_error());
    unsafe { repstab_matrixfn_free(f) };

    // malformed JSON
    let bad = CString::new("{not json").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { repstab_matrixfn_load_json(bad.as_ptr(), &mut out) };
    assert_eq!(status, RepstabStatus::RepstabInvalidArgument);
}
