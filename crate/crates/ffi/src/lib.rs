//! C ABI over the spreadlab core.
//!
//! Families cross the boundary as opaque `SlFamily` handles. Every fallible
//! call returns an `SlStatus`; on failure the message is kept per thread and
//! read with `sl_last_error`. Strings returned to the caller are owned by the
//! caller and released with `sl_string_free`. Elements are 1-based, as in
//! family files.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spreadlab::approx::{spread_approximate, verify_approximation};
use spreadlab::io::{family_to_json, parse_family};
use spreadlab::metrics::spread_radius;
use spreadlab::oracle::{derangement_count, max_t_intersecting};
use spreadlab::probabilistic::find_sunflower;
use spreadlab::{Error, GroundSet, SetFamily, SubsetMask};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Contract = 4,
    Budget = 5,
    Utf8 = 6,
    Panic = 7,
}

/// A set family on a ground set `{1, …, n}`.
pub struct SlFamily {
    inner: SetFamily,
}

/// Exact spread radius `(num/den)^(1/root)`, with a float rendering.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlRadius {
    /// 0 when the radius is unbounded; the other fields are then zero.
    pub bounded: bool,
    pub num: u64,
    pub den: u64,
    pub root: u32,
    pub value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::Parse { .. } | Error::Field { .. } | Error::Read { .. } | Error::Io(_) => SlStatus::Parse,
        Error::BudgetExceeded { .. } => SlStatus::Budget,
        Error::NotSubfamily | Error::NotUniform | Error::NotTIntersecting { .. } | Error::EmptyMember => {
            SlStatus::Contract
        }
        _ => SlStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> SlStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, turning panics into `SlStatus::Panic`.
fn guard<F: FnOnce() -> SlStatus>(f: F) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == SlStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Panic
        }
    }
}

fn null(what: &str) -> SlStatus {
    set_error(format!("{what} is null"));
    SlStatus::NullPointer
}

unsafe fn family_ref<'a>(f: *const SlFamily) -> Option<&'a SetFamily> {
    f.as_ref().map(|h| &h.inner)
}

fn into_handle(f: SetFamily) -> *mut SlFamily {
    Box::into_raw(Box::new(SlFamily { inner: f }))
}

fn into_c_string(s: String, out: *mut *mut c_char) -> SlStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SlStatus::Ok
        }
        Err(_) => {
            set_error("output contains a NUL byte");
            SlStatus::Utf8
        }
    }
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is null or came from this library and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an empty family on `{1, …, n}`.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_family_new(n: usize, out: *mut *mut SlFamily) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match SetFamily::empty(n) {
            Ok(f) => {
                *out = into_handle(f);
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Adds the set `elems[0..len]` (1-based). Duplicate sets are ignored.
///
/// # Safety
/// `f` is a live handle; `elems` points to `len` values or `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn sl_family_add(f: *mut SlFamily, elems: *const usize, len: usize) -> SlStatus {
    guard(|| {
        let Some(h) = f.as_mut() else { return null("family") };
        if elems.is_null() && len > 0 {
            return null("elems");
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(elems, len) };
        let Some(mask) = SubsetMask::from_one_based(slice) else {
            set_error("elements are 1-based");
            return SlStatus::InvalidArgument;
        };
        let n = h.inner.n();
        let members = h.inner.members().iter().cloned().chain(std::iter::once(mask));
        match GroundSet::new(n).and_then(|g| SetFamily::new(g, members)) {
            Ok(next) => {
                h.inner = next;
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses a family from JSON text (`{"n":…,"sets":[…]}` or a permutation file).
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_family_from_json(json: *const c_char, out: *mut *mut SlFamily) -> SlStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            set_error("input is not UTF-8");
            return SlStatus::Utf8;
        };
        match parse_family(text, Path::new("<ffi>")).and_then(|l| l.into_set_family()) {
            Ok(f) => {
                *out = into_handle(f);
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes a family as JSON; free the result with `sl_string_free`.
///
/// # Safety
/// `f` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_family_to_json(f: *const SlFamily, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if out.is_null() {
            return null("out");
        }
        into_c_string(family_to_json(fam), out)
    })
}

/// Releases a family handle.
///
/// # Safety
/// `f` is null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sl_family_free(f: *mut SlFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of members, or 0 for a null handle.
///
/// # Safety
/// `f` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_family_len(f: *const SlFamily) -> usize {
    family_ref(f).map_or(0, SetFamily::len)
}

/// Size of the ground set, or 0 for a null handle.
///
/// # Safety
/// `f` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_family_ground_size(f: *const SlFamily) -> usize {
    family_ref(f).map_or(0, SetFamily::n)
}

/// Exact spread radius of a nonempty family.
///
/// # Safety
/// `f` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_spread_radius(f: *const SlFamily, out: *mut SlRadius) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if out.is_null() {
            return null("out");
        }
        let report = match spread_radius(fam) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        *out = match report.radius {
            None => SlRadius::default(),
            Some(r) => SlRadius {
                bounded: true,
                num: r.num,
                den: r.den,
                root: r.root,
                value: r.to_f64(),
            },
        };
        SlStatus::Ok
    })
}

/// Writes whether every two members share at least `t` elements.
///
/// # Safety
/// `f` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_is_t_intersecting(f: *const SlFamily, t: usize, out: *mut bool) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if out.is_null() {
            return null("out");
        }
        *out = fam.is_t_intersecting(t);
        SlStatus::Ok
    })
}

/// Smallest number of elements meeting every member.
///
/// # Safety
/// `f` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_cover_number(f: *const SlFamily, out: *mut usize) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if out.is_null() {
            return null("out");
        }
        match fam.cover_number() {
            Ok(c) => {
                *out = c;
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Largest `t`-intersecting subfamily. `witness` may be null; otherwise it
/// receives a new handle. `SlStatus::Budget` means the size is a lower bound
/// and `witness` still holds the best family found.
///
/// # Safety
/// `f` is a live handle; `optimum` is valid; `witness` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn sl_max_t_intersecting(
    f: *const SlFamily,
    t: usize,
    budget: u64,
    optimum: *mut usize,
    witness: *mut *mut SlFamily,
) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if optimum.is_null() {
            return null("optimum");
        }
        match max_t_intersecting(fam, t, budget) {
            Ok(r) => {
                *optimum = r.optimum;
                if !witness.is_null() {
                    *witness = into_handle(r.witness);
                }
                if r.proved_optimal {
                    SlStatus::Ok
                } else {
                    set_error(format!("budget of {budget} nodes exhausted"));
                    SlStatus::Budget
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// Searches for `petals` members forming a sunflower. On success `found`
/// says whether one exists and, if so, `indices[0..petals]` receives the
/// member indices (0-based positions in the family).
///
/// # Safety
/// `f` is a live handle; `found` is valid; `indices` is null or holds
/// `petals` slots.
#[no_mangle]
pub unsafe extern "C" fn sl_find_sunflower(
    f: *const SlFamily,
    petals: usize,
    budget: u64,
    found: *mut bool,
    indices: *mut usize,
) -> SlStatus {
    guard(|| {
        let Some(fam) = family_ref(f) else { return null("family") };
        if found.is_null() {
            return null("found");
        }
        match find_sunflower(fam, petals, budget) {
            Ok(s) => {
                *found = s.is_some();
                if let (Some(s), false) = (s, indices.is_null()) {
                    std::slice::from_raw_parts_mut(indices, petals).copy_from_slice(&s.petals);
                }
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of derangements of an `m`-set as a decimal string.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_derangements(m: usize, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        into_c_string(derangement_count(m).to_string(), out)
    })
}

/// Runs and verifies the spread approximation of `family` inside
/// `ambient`; the result and verdicts come back as one JSON document.
///
/// # Safety
/// Both handles are live; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_approximate_json(
    ambient: *const SlFamily,
    family: *const SlFamily,
    tau: f64,
    q: usize,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let Some(a) = family_ref(ambient) else { return null("ambient") };
        let Some(f) = family_ref(family) else { return null("family") };
        if out.is_null() {
            return null("out");
        }
        let doc = spread_approximate(a, f, tau, q).and_then(|res| {
            let verdicts = verify_approximation(&res, a, f, tau, q)?;
            Ok(serde_json::json!({ "result": res, "verdicts": verdicts }))
        });
        match doc {
            Ok(v) => into_c_string(v.to_string(), out),
            Err(e) => fail(e),
        }
    })
}
