use std::ffi::{c_char, CStr, CString};
use std::ptr;

use uew_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { uew_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn example() -> (*mut UewOperator, *mut UewOperator) {
    let (mut l, mut c) = (ptr::null_mut(), ptr::null_mut());
    let st = unsafe { uew_example31_operators(2.0 / 3.0, UewPovm::Complete, &mut l, &mut c) };
    assert_eq!(st, UewStatus::Ok);
    (l, c)
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(uew_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn operator_json_and_dims() {
    let json = CString::new(r#"{"dims":[2,2],"matrix":[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]}"#).unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { uew_operator_from_json(json.as_ptr(), &mut op) }, UewStatus::Ok);
    let (mut a, mut b) = (0, 0);
    assert_eq!(unsafe { uew_operator_dims(op, &mut a, &mut b) }, UewStatus::Ok);
    assert_eq!((a, b), (2, 2));
    let mut v = 0.0;
    let mut conv = false;
    assert_eq!(unsafe { uew_gs(op, 4, 1, &mut v, &mut conv) }, UewStatus::Ok);
    assert!((v - 1.0).abs() < 1e-12 && conv);
    unsafe { uew_operator_free(op) };
}

#[test]
fn malformed_json_sets_message() {
    let json = CString::new("{").unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { uew_operator_from_json(json.as_ptr(), &mut op) }, UewStatus::InvalidInput);
    assert!(op.is_null());
    assert!(last_error().contains("parse error"));
}

#[test]
fn null_pointers_reported() {
    let mut v = 0.0;
    assert_eq!(unsafe { uew_gs(ptr::null(), 0, 0, &mut v, ptr::null_mut()) }, UewStatus::NullPointer);
    assert!(last_error().contains("test"));
    unsafe {
        uew_operator_free(ptr::null_mut());
        uew_state_free(ptr::null_mut());
    }
}

#[test]
fn message_truncates_and_reports_full_length() {
    let json = CString::new("[1,2").unwrap();
    let mut op = ptr::null_mut();
    unsafe { uew_operator_from_json(json.as_ptr(), &mut op) };
    let full = unsafe { uew_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [0 as c_char; 8];
    let n = unsafe { uew_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn states_from_arrays() {
    let re = [0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25];
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { uew_state_from_arrays(2, 2, re.as_ptr(), ptr::null(), &mut st) }, UewStatus::Ok);
    let (l, c) = example();
    let mut v = 0.0;
    assert_eq!(unsafe { uew_expectation(l, st, &mut v) }, UewStatus::Ok);
    assert!((v - 1.0 / 9.0).abs() < 1e-12);
    let bad = [2.0, 0.0, 0.0, -1.0];
    let mut st2 = ptr::null_mut();
    assert_eq!(unsafe { uew_state_from_arrays(1, 2, bad.as_ptr(), ptr::null(), &mut st2) }, UewStatus::InvalidInput);
    assert!(st2.is_null());
    unsafe {
        uew_state_free(st);
        uew_operator_free(l);
        uew_operator_free(c);
    }
}

#[test]
fn constrained_sides_and_infeasibility() {
    let (l, c) = example();
    let (mut leq, mut geq) = (0.0, 0.0);
    assert_eq!(unsafe { uew_pc(l, c, 0.01, UewSide::Leq, 8, 0, &mut leq) }, UewStatus::Ok);
    assert_eq!(unsafe { uew_pc(l, c, 0.01, UewSide::Geq, 8, 0, &mut geq) }, UewStatus::Ok);
    assert!((geq - 4.0 / 9.0).abs() < 1e-9);
    assert!(leq < geq);
    let mut v = 0.0;
    assert_eq!(unsafe { uew_pc(l, c, -1.0, UewSide::Leq, 8, 0, &mut v) }, UewStatus::Infeasible);
    unsafe {
        uew_operator_free(l);
        uew_operator_free(c);
    }
}

#[test]
fn detection_through_the_abi() {
    let (l, c) = example();
    let mut pure = ptr::null_mut();
    assert_eq!(unsafe { uew_example31_state(0.0, &mut pure) }, UewStatus::Ok);
    let (mut ent, mut w) = (false, 0.0);
    assert_eq!(unsafe { uew_detect(pure, l, c, 0.01, -1.0, 0, &mut ent, &mut w) }, UewStatus::Ok);
    assert!(ent && w < 0.0);
    assert_eq!(unsafe { uew_detect(pure, l, c, 0.01, f64::NAN, 0, &mut ent, &mut w) }, UewStatus::Ok);
    assert!(!ent);
    assert_eq!(unsafe { uew_detect(pure, l, c, 0.01, 2.0, 0, &mut ent, &mut w) }, UewStatus::InvalidInput);
    assert_eq!(unsafe { uew_detect(pure, l, l, 0.01, -1.0, 0, &mut ent, &mut w) }, UewStatus::InvalidInput);
    unsafe {
        uew_state_free(pure);
        uew_operator_free(l);
        uew_operator_free(c);
    }
}

#[test]
fn scan_thresholds() {
    let alphas = [0.0, -1.0, f64::NEG_INFINITY];
    let mut out = [0.0; 3];
    let st = unsafe { uew_scan_example31(2.0 / 3.0, 0.01, alphas.as_ptr(), 3, 0, out.as_mut_ptr()) };
    assert_eq!(st, UewStatus::Ok);
    assert!(out[0].is_nan());
    assert!((out[1] - 0.004).abs() <= 1e-3);
    assert!((out[2] - 0.010).abs() <= 1e-3);
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let header = std::fs::read_to_string(format!("{dir}/include/uew.h")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct UewOperator UewOperator;"));
    assert!(header.contains("UEW_STATUS_INFEASIBLE = 3"));
}

#[test]
fn header_compiles_as_c99() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let tmp = std::env::temp_dir().join(format!("uew_header_check_{}.c", std::process::id()));
    std::fs::write(
        &tmp,
        "#include \"uew.h\"\nint main(void) {\n  UewOperator *op = 0;\n  return uew_operator_from_json(\"{}\", &op) == UEW_STATUS_OK;\n}\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&tmp)
        .status();
    let _ = std::fs::remove_file(&tmp);
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(e) => eprintln!("no C compiler available, header check skipped: {e}"),
    }
}
