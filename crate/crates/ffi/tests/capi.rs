use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use xtree_ffi::*;

fn canonical(h: usize, order: XtOrder) -> *mut XtTree {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { xt_tree_canonical(h, 2, order, 0, &mut t) }, XtStatus::Ok);
    assert!(!t.is_null());
    t
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(xt_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn tree_round_trip_and_queries() {
    let t = canonical(3, XtOrder::Lex);
    let mut count = 0;
    assert_eq!(unsafe { xt_tree_node_count(t, &mut count) }, XtStatus::Ok);
    assert_eq!(count, 7);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { xt_tree_to_text(t, &mut text) }, XtStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { xt_tree_from_text(text, &mut back) }, XtStatus::Ok);
    let mut count2 = 0;
    unsafe { xt_tree_node_count(back, &mut count2) };
    assert_eq!(count2, 7);

    let mut violations = usize::MAX;
    assert_eq!(unsafe { xt_tree_validate(t, false, &mut violations) }, XtStatus::Ok);
    assert_eq!(violations, 0);

    // nodes 3 and 4 are the children of node 1 in the lex tree
    let mut m = 0;
    assert_eq!(unsafe { xt_tree_meet(t, 3, 4, &mut m) }, XtStatus::Ok);
    assert_eq!(m, 1);
    let mut r = 0;
    assert_eq!(unsafe { xt_tree_restrict(t, 6, 0, &mut r) }, XtStatus::Ok);
    assert_eq!(r, 0);
    let mut less = false;
    assert_eq!(unsafe { xt_tree_lex_less(t, 3, 4, &mut less) }, XtStatus::Ok);
    assert!(less);

    unsafe {
        xt_string_free(text);
        xt_tree_free(back);
        xt_tree_free(t);
    }
}

#[test]
fn errors_are_reported() {
    let t = canonical(3, XtOrder::Reversed);
    let mut out = 0;
    assert_eq!(unsafe { xt_tree_restrict(t, 0, 2, &mut out) }, XtStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { xt_tree_meet(t, 0, 99, &mut out) }, XtStatus::InvalidNode);
    assert_eq!(unsafe { xt_tree_meet(ptr::null(), 0, 0, &mut out) }, XtStatus::NullPointer);
    assert_eq!(unsafe { xt_tree_meet(t, 0, 0, ptr::null_mut()) }, XtStatus::NullPointer);
    let mut b = false;
    assert_eq!(unsafe { xt_tree_lex_less(t, 1, 1, &mut b) }, XtStatus::Domain);

    let bad = CString::new("not a tree").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { xt_tree_from_text(bad.as_ptr(), &mut h) }, XtStatus::Parse);
    assert!(h.is_null());
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { xt_tree_canonical(0, 2, XtOrder::Lex, 0, &mut h) }, XtStatus::InvalidArgument);

    assert_eq!(unsafe { xt_tree_node_count(t, &mut out) }, XtStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { xt_tree_free(t) };
}

#[test]
fn closure_and_types() {
    let t = canonical(4, XtOrder::Lex);
    let nodes = [3usize, 5];
    let mut buf = [0usize; 2];
    let mut len = 0;
    let s = unsafe { xt_closure(t, nodes.as_ptr(), 2, buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(s, XtStatus::BufferTooSmall);
    assert_eq!(len, 3);
    let mut buf = [0usize; 8];
    let s = unsafe { xt_closure(t, nodes.as_ptr(), 2, buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(s, XtStatus::Ok);
    assert_eq!(&buf[..len], &[0, 3, 5]);

    let mut st = ptr::null_mut();
    assert_eq!(unsafe { xt_sim_type_string(t, [7usize].as_ptr(), 1, &mut st) }, XtStatus::Ok);
    let s = unsafe { CStr::from_ptr(st) }.to_str().unwrap().to_owned();
    assert_eq!(s, "b=2;br=.;le=1;lev=1;meet=0;n=1;pos=0;restr=0");
    unsafe { xt_string_free(st) };

    let mut total = 0;
    assert_eq!(unsafe { xt_census_total(t, 2, 1_000_000, &mut total) }, XtStatus::Ok);
    assert_eq!(total, 2);
    assert_eq!(unsafe { xt_census_total(t, 3, 5, &mut total) }, XtStatus::BudgetExceeded);
    unsafe { xt_tree_free(t) };
}

#[test]
fn arrow_check() {
    let big = canonical(3, XtOrder::Lex);
    let small = canonical(2, XtOrder::Lex);
    let text = CString::new("xtree-coloring 1\narity 1\nsigma 1\nkind level\n").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { xt_coloring_from_text(text.as_ptr(), &mut c) }, XtStatus::Ok);
    let mut holds = false;
    assert_eq!(unsafe { xt_check_arrow(big, small, 1, c, &mut holds) }, XtStatus::Ok);
    assert!(holds);
    assert_eq!(unsafe { xt_check_arrow(big, small, 2, c, &mut holds) }, XtStatus::ArityMismatch);
    unsafe {
        xt_coloring_free(c);
        xt_tree_free(big);
        xt_tree_free(small);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/xtree.h")).unwrap();
    for name in [
        "typedef struct XtTree XtTree",
        "typedef struct XtColoring XtColoring",
        "XT_STATUS_OK = 0",
        "xt_last_error_message",
        "xt_tree_canonical",
        "xt_tree_from_text",
        "xt_tree_load",
        "xt_tree_free",
        "xt_tree_to_text",
        "xt_tree_node_count",
        "xt_tree_meet",
        "xt_tree_restrict",
        "xt_tree_lex_less",
        "xt_tree_validate",
        "xt_closure",
        "xt_sim_type_string",
        "xt_census_total",
        "xt_coloring_from_text",
        "xt_coloring_free",
        "xt_check_arrow",
        "xt_string_free",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-"])
        .arg(concat!("-I", env!("CARGO_MANIFEST_DIR"), "/include"))
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"#include \"xtree.h\"\nint main(void) { return XT_STATUS_OK; }\n")?;
            child.wait_with_output()
        })
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
