//! C ABI over the `xtree` library.
//!
//! Trees and colorings are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`XtStatus`]; on failure the message is available from
//! [`xt_last_error_message`] on the same thread. Strings returned through
//! out-parameters are released with [`xt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xtree::partition::{check_arrow, Coloring};
use xtree::{census, eseq, Error, ExpandedTree, LevelOrder};

/// Opaque expanded tree.
pub struct XtTree(ExpandedTree);

/// Opaque coloring.
pub struct XtColoring(Coloring);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidNode = 3,
    Domain = 4,
    Malformed = 5,
    Parse = 6,
    Io = 7,
    BudgetExceeded = 8,
    ArityMismatch = 9,
    BufferTooSmall = 10,
    Utf8 = 11,
    Panic = 12,
}

/// Level order of a canonical tree.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XtOrder {
    Lex = 0,
    Reversed = 1,
    SeededShuffle = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> XtStatus {
    match e {
        Error::InvalidNode { .. } => XtStatus::InvalidNode,
        Error::Domain(_) => XtStatus::Domain,
        Error::MalformedTree(_) | Error::InvalidPermutation { .. } => XtStatus::Malformed,
        Error::Parse { .. } => XtStatus::Parse,
        Error::Io(_) => XtStatus::Io,
        Error::BudgetExceeded { .. } => XtStatus::BudgetExceeded,
        Error::ArityMismatch(_) => XtStatus::ArityMismatch,
        _ => XtStatus::InvalidArgument,
    }
}

/// Run `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), XtStatusError>) -> XtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            XtStatus::Ok
        }
        Ok(Err(XtStatusError(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            XtStatus::Panic
        }
    }
}

struct XtStatusError(XtStatus, String);

impl From<Error> for XtStatusError {
    fn from(e: Error) -> Self {
        XtStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> XtStatusError {
    XtStatusError(XtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn tree_ref<'a>(t: *const XtTree) -> Result<&'a ExpandedTree, XtStatusError> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null("tree"))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, XtStatusError> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, XtStatusError> {
    if s.is_null() {
        return Err(null("string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| XtStatusError(XtStatus::Utf8, "string is not UTF-8".into()))
}

unsafe fn slice_arg<'a>(p: *const usize, len: usize) -> Result<&'a [usize], XtStatusError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("node array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn c_string(s: String) -> Result<*mut c_char, XtStatusError> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| XtStatusError(XtStatus::InvalidArgument, "string contains NUL".into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn xt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build the full canonical tree of the given height and branching.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_canonical(
    height: usize,
    branching: usize,
    order: XtOrder,
    seed: u64,
    out: *mut *mut XtTree,
) -> XtStatus {
    guard(|| {
        let out = out_ref(out)?;
        let order = match order {
            XtOrder::Lex => LevelOrder::Lex,
            XtOrder::Reversed => LevelOrder::Reversed,
            XtOrder::SeededShuffle => LevelOrder::Shuffled(seed),
        };
        let t = ExpandedTree::canonical_with(height, branching, &order)?;
        *out = Box::into_raw(Box::new(XtTree(t)));
        Ok(())
    })
}

/// Parse a tree from the text file format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_from_text(text: *const c_char, out: *mut *mut XtTree) -> XtStatus {
    guard(|| {
        let out = out_ref(out)?;
        let t = ExpandedTree::from_text(str_arg(text)?)?;
        *out = Box::into_raw(Box::new(XtTree(t)));
        Ok(())
    })
}

/// Load a tree file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_load(path: *const c_char, out: *mut *mut XtTree) -> XtStatus {
    guard(|| {
        let out = out_ref(out)?;
        let text = std::fs::read_to_string(str_arg(path)?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(XtTree(ExpandedTree::from_text(&text)?)));
        Ok(())
    })
}

/// # Safety
/// `tree` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_free(tree: *mut XtTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Serialize a tree; release the string with [`xt_string_free`].
///
/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_to_text(tree: *const XtTree, out: *mut *mut c_char) -> XtStatus {
    guard(|| {
        let t = tree_ref(tree)?;
        *out_ref(out)? = c_string(t.to_text())?;
        Ok(())
    })
}

/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_node_count(tree: *const XtTree, out: *mut usize) -> XtStatus {
    guard(|| {
        *out_ref(out)? = tree_ref(tree)?.node_count();
        Ok(())
    })
}

/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_meet(tree: *const XtTree, s: usize, t: usize, out: *mut usize) -> XtStatus {
    guard(|| {
        *out_ref(out)? = tree_ref(tree)?.meet(s, t)?;
        Ok(())
    })
}

/// The ancestor of `t` on `level`.
///
/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_restrict(tree: *const XtTree, t: usize, level: usize, out: *mut usize) -> XtStatus {
    guard(|| {
        *out_ref(out)? = tree_ref(tree)?.restrict(t, level)?;
        Ok(())
    })
}

/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_lex_less(tree: *const XtTree, s: usize, t: usize, out: *mut bool) -> XtStatus {
    guard(|| {
        *out_ref(out)? = tree_ref(tree)?.lex_less(s, t)?;
        Ok(())
    })
}

/// Number of axiom violations.
///
/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_tree_validate(tree: *const XtTree, strict: bool, out: *mut usize) -> XtStatus {
    guard(|| {
        *out_ref(out)? = tree_ref(tree)?.validate(strict).len();
        Ok(())
    })
}

/// Closure of a node set, written to `out_nodes` in `<*` order. `out_len`
/// receives the closure size even when `capacity` is too small.
///
/// # Safety
/// `nodes` must point to `len` readable values, `out_nodes` to `capacity`
/// writable values, and `tree`, `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn xt_closure(
    tree: *const XtTree,
    nodes: *const usize,
    len: usize,
    out_nodes: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> XtStatus {
    guard(|| {
        let t = tree_ref(tree)?;
        let cl = eseq::closure(t, slice_arg(nodes, len)?)?;
        let out_len = out_ref(out_len)?;
        *out_len = cl.len();
        if cl.len() > capacity {
            return Err(XtStatusError(XtStatus::BufferTooSmall, format!("closure has {} nodes", cl.len())));
        }
        if !cl.is_empty() {
            if out_nodes.is_null() {
                return Err(null("output node array"));
            }
            ptr::copy_nonoverlapping(cl.nodes().as_ptr(), out_nodes, cl.len());
        }
        Ok(())
    })
}

/// Canonical string of the similarity type of a node sequence.
///
/// # Safety
/// `nodes` must point to `len` readable values; `tree`, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn xt_sim_type_string(
    tree: *const XtTree,
    nodes: *const usize,
    len: usize,
    out: *mut *mut c_char,
) -> XtStatus {
    guard(|| {
        let st = eseq::sim_type(tree_ref(tree)?, slice_arg(nodes, len)?)?;
        *out_ref(out)? = c_string(st.canonical_string())?;
        Ok(())
    })
}

/// Number of similarity types of embedded sequences of length `n`.
///
/// # Safety
/// `tree` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_census_total(tree: *const XtTree, n: usize, budget: u64, out: *mut u64) -> XtStatus {
    guard(|| {
        *out_ref(out)? = census::census(tree_ref(tree)?, n, budget)?.total_types;
        Ok(())
    })
}

/// Parse a coloring from the coloring file format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xt_coloring_from_text(text: *const c_char, out: *mut *mut XtColoring) -> XtStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = Box::into_raw(Box::new(XtColoring(Coloring::from_text(str_arg(text)?)?)));
        Ok(())
    })
}

/// # Safety
/// `coloring` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xt_coloring_free(coloring: *mut XtColoring) {
    if !coloring.is_null() {
        drop(Box::from_raw(coloring));
    }
}

/// Whether some embedding of `small` into `big` makes `coloring` depend only
/// on the similarity type of `n`-sequences.
///
/// # Safety
/// Handles must be live and `out_holds` valid.
#[no_mangle]
pub unsafe extern "C" fn xt_check_arrow(
    big: *const XtTree,
    small: *const XtTree,
    n: usize,
    coloring: *const XtColoring,
    out_holds: *mut bool,
) -> XtStatus {
    guard(|| {
        let c = coloring.as_ref().map(|c| &c.0).ok_or_else(|| null("coloring"))?;
        *out_ref(out_holds)? = check_arrow(tree_ref(big)?, tree_ref(small)?, n, c)?.holds();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
