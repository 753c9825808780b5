//! C interface to the experiment runner.
//!
//! Configurations and result tables are opaque handles owned by the caller
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`TsStatus`]; the message of the last failure on the calling
//! thread is available from [`ts_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trimstab::experiments::{self, ExperimentConfig, Table};
use trimstab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    NumericalError = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Parsed experiment configuration.
pub struct TsConfig {
    inner: ExperimentConfig,
}

/// CSV result table.
pub struct TsTable {
    inner: Table,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TsStatus, msg: &str) -> TsStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> TsStatus {
    let status = if e.is_config() {
        TsStatus::ConfigError
    } else {
        TsStatus::NumericalError
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> TsStatus) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TsStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, TsStatus> {
    if s.is_null() {
        return Err(fail(TsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(TsStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses configuration text (`key = value` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_config_parse(text: *const c_char, out: *mut *mut TsConfig) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ExperimentConfig::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TsConfig { inner }));
                TsStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Reads and parses a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_config_load(path: *const c_char, out: *mut *mut TsConfig) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let path = match read_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ExperimentConfig::load(path.as_ref()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TsConfig { inner }));
                TsStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `cfg` must come from `ts_config_parse`/`ts_config_load` or be null.
#[no_mangle]
pub unsafe extern "C" fn ts_config_free(cfg: *mut TsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured experiment.
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_run(cfg: *const TsConfig, out: *mut *mut TsTable) -> TsStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(TsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        match experiments::run(&(*cfg).inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TsTable { inner }));
                TsStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `table` must come from `ts_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn ts_table_free(table: *mut TsTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of data rows, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live table handle or null.
#[no_mangle]
pub unsafe extern "C" fn ts_table_rows(table: *const TsTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.rows.len())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live table handle or null.
#[no_mangle]
pub unsafe extern "C" fn ts_table_cols(table: *const TsTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.header.len())
}

/// Numeric value of a cell. Blank cells read as NaN; text cells are a
/// config error.
///
/// # Safety
/// `table` must be a live table handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_table_value(
    table: *const TsTable,
    row: usize,
    col: usize,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        let Some(t) = table.as_ref() else {
            return fail(TsStatus::NullPointer, "null table");
        };
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output pointer");
        }
        let Some(cell) = t.inner.rows.get(row).and_then(|r| r.get(col)) else {
            return fail(
                TsStatus::OutOfRange,
                &format!("cell ({row}, {col}) out of range"),
            );
        };
        if cell.is_empty() {
            *out = f64::NAN;
            return TsStatus::Ok;
        }
        match cell.parse::<f64>() {
            Ok(v) => {
                *out = v;
                TsStatus::Ok
            }
            Err(_) => fail(
                TsStatus::ConfigError,
                &format!("cell '{cell}' is not numeric"),
            ),
        }
    })
}

/// Column header as a newly allocated string; release with
/// `ts_string_free`.
///
/// # Safety
/// `table` must be a live table handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_table_header(
    table: *const TsTable,
    col: usize,
    out: *mut *mut c_char,
) -> TsStatus {
    guard(|| {
        let Some(t) = table.as_ref() else {
            return fail(TsStatus::NullPointer, "null table");
        };
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        match t.inner.header.get(col) {
            Some(h) => {
                *out = CString::new(h.as_str()).unwrap_or_default().into_raw();
                TsStatus::Ok
            }
            None => fail(TsStatus::OutOfRange, &format!("column {col} out of range")),
        }
    })
}

/// Whole table as CSV; release with `ts_string_free`.
///
/// # Safety
/// `table` must be a live table handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_table_to_csv(table: *const TsTable, out: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let Some(t) = table.as_ref() else {
            return fail(TsStatus::NullPointer, "null table");
        };
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output pointer");
        }
        *out = CString::new(t.inner.to_csv())
            .unwrap_or_default()
            .into_raw();
        TsStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
