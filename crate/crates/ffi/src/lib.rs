//! C ABI over the advisor engine.
//!
//! Every function returns a [`ChfStatus`]; on failure the message is
//! available from [`chf_last_error_message`] on the same thread. Strings the
//! library hands out are NUL-terminated UTF-8 owned by the caller, released
//! with [`chf_string_free`]; on failure output arguments are left untouched.
//! Knowledge bases are opaque [`ChfKb`] handles, released with
//! [`chf_kb_free`]; a handle may be shared between threads for reading.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use chf_advisor::cli::AnswerRecord;
use chf_advisor::ground::{ground_program, GroundError};
use chf_advisor::kb::{self, default_kb, load_kb, Kb, KbError, PatientRecord};
use chf_advisor::parser::{parse_program, parse_query, ParseError};
use chf_advisor::solver::{solve, SolveError, SolveOptions};

/// Result codes. `CHF_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read.
    Io = 3,
    /// Program or query text did not parse.
    Parse = 4,
    /// Unsafe rules or ill-typed comparisons.
    Ground = 5,
    /// Malformed or invalid patient JSON, unknown treatment or class, or an
    /// unsafe query.
    InvalidInput = 6,
    /// The step budget ran out before the search finished.
    ResourceLimit = 7,
    /// A bug inside the library; the message says where.
    Internal = 8,
}

/// A loaded knowledge base.
pub struct ChfKb {
    kb: Kb,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(ChfStatus, String);

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        let status = match &e {
            KbError::Io { .. } => ChfStatus::Io,
            KbError::Parse { .. } => ChfStatus::Parse,
            KbError::Ground(_) => ChfStatus::Ground,
            KbError::Solve(SolveError::ResourceLimit(_)) => ChfStatus::ResourceLimit,
            KbError::Abduction(chf_advisor::abduction::AbductionError::Solve(SolveError::ResourceLimit(_))) => {
                ChfStatus::ResourceLimit
            }
            KbError::Abduction(chf_advisor::abduction::AbductionError::Ground(_)) => ChfStatus::Ground,
            _ => ChfStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure(ChfStatus::Parse, e.to_string())
    }
}

impl From<GroundError> for Failure {
    fn from(e: GroundError) -> Self {
        Failure(ChfStatus::Ground, e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::ResourceLimit(_) => Failure(ChfStatus::ResourceLimit, e.to_string()),
            _ => Failure(ChfStatus::InvalidInput, e.to_string()),
        }
    }
}

fn set_error(msg: &str) {
    // interior NULs cannot cross the boundary
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording its error (or panic) for `chf_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ChfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ChfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            ChfStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(ChfStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(ChfStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a>(kb: *const ChfKb) -> Result<&'a ChfKb, Failure> {
    kb.as_ref().ok_or_else(|| Failure(ChfStatus::NullArgument, "kb is null".into()))
}

unsafe fn out_ptr<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    out.as_mut().ok_or_else(|| Failure(ChfStatus::NullArgument, format!("{what} is null")))
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior NUL").into_raw()
}

fn patient(json: &str) -> Result<PatientRecord, Failure> {
    serde_json::from_str(json).map_err(|e| Failure(ChfStatus::InvalidInput, format!("patient: {e}")))
}

fn limit_of(n: usize) -> Option<usize> {
    (n > 0).then_some(n)
}

/// Loads the knowledge base bundled with the library into `*out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn chf_kb_load_default(out: *mut *mut ChfKb) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(ChfKb { kb: default_kb() }));
        Ok(())
    })
}

/// Loads `.lp` files (directories contribute their `.lp` files in name
/// order) into `*out`. With `count == 0` the base is empty.
///
/// # Safety
/// `paths` must point to `count` NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn chf_kb_load_paths(
    paths: *const *const c_char,
    count: usize,
    out: *mut *mut ChfKb,
) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if paths.is_null() && count > 0 {
            return Err(Failure(ChfStatus::NullArgument, "paths is null".into()));
        }
        let mut list = Vec::with_capacity(count);
        for i in 0..count {
            list.push(PathBuf::from(text(*paths.add(i), "path")?));
        }
        *out = Box::into_raw(Box::new(ChfKb { kb: load_kb(&list)? }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `kb` must come from one of the load functions and not be used again.
#[no_mangle]
pub unsafe extern "C" fn chf_kb_free(kb: *mut ChfKb) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Number of rules in the loaded base (patterns expanded).
///
/// # Safety
/// `kb` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chf_kb_rule_count(kb: *const ChfKb, out: *mut usize) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = handle(kb)?.kb.program.rules.len();
        Ok(())
    })
}

/// Recommendations for a patient document, as a JSON array of
/// `{treatment, class, support: {positive, nafs}}`. `limit == 0` means all.
///
/// # Safety
/// `kb` must be a live handle, `patient_json` a NUL-terminated string and
/// `out_json` writable. The result must be released with `chf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn chf_recommend_json(
    kb: *const ChfKb,
    patient_json: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        let kb = handle(kb)?;
        let record = patient(text(patient_json, "patient_json")?)?;
        let recs = kb::recommend(&record, &kb.kb, limit_of(limit))?;
        *out = give_string(serde_json::to_string(&recs).expect("serializable"));
        Ok(())
    })
}

/// What would have to hold for `treatment` to be recommended at
/// `class_label`, as a JSON array of `{assumptions: {positive, negative},
/// support: {positive, nafs}}`. `limit == 0` means all.
///
/// # Safety
/// As for [`chf_recommend_json`]; `treatment` and `class_label` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn chf_whatif_json(
    kb: *const ChfKb,
    patient_json: *const c_char,
    treatment: *const c_char,
    class_label: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        let kb = handle(kb)?;
        let record = patient(text(patient_json, "patient_json")?)?;
        let treatment = text(treatment, "treatment")?;
        let class_label = text(class_label, "class_label")?;
        let res = kb::whatif(&record, &kb.kb, treatment, class_label, limit_of(limit))?;
        *out = give_string(serde_json::to_string(&res).expect("serializable"));
        Ok(())
    })
}

/// Answers `query` against the base plus `program` (extra facts and rules
/// in `.lp` syntax; may be null). The result is a JSON array of
/// `{bindings, positive, nafs, assumptions}` with literals in `.lp` syntax.
/// `limit == 0` means all.
///
/// # Safety
/// `kb` must be a live handle, `query` a NUL-terminated string, `program`
/// null or NUL-terminated, and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn chf_solve_json(
    kb: *const ChfKb,
    program: *const c_char,
    query: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> ChfStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        let kb = handle(kb)?;
        let query = parse_query(text(query, "query")?)?;
        let mut p = kb.kb.program.clone();
        if !program.is_null() {
            p.extend(parse_program(text(program, "program")?)?);
        }
        let g = ground_program(&p)?;
        let answers = solve(&g, &query, &SolveOptions { limit: limit_of(limit), ..SolveOptions::default() })?;
        let records: Vec<AnswerRecord> = answers
            .iter()
            .map(|a| {
                let b: Vec<(String, String)> = a.bindings.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
                AnswerRecord::new(a, &b, None)
            })
            .collect();
        *out = give_string(serde_json::to_string(&records).expect("serializable"));
        Ok(())
    })
}

/// The message for the last failed call on this thread; empty after a
/// successful call. Valid until the next call on this thread; do not free.
#[no_mangle]
pub extern "C" fn chf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn chf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The library version; static, do not free.
#[no_mangle]
pub extern "C" fn chf_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version has no NUL"),
    };
    VERSION.as_ptr()
}
