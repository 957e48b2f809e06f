use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};

use cxr_phase::Error;
use libc::c_char;

/// Result code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CxrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Decode = 4,
    Config = 5,
    Numeric = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

pub(crate) struct Failure {
    pub status: CxrStatus,
    pub message: String,
}

impl Failure {
    pub fn null(name: &str) -> Self {
        Self {
            status: CxrStatus::NullPointer,
            message: format!("`{name}` is null"),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            status: CxrStatus::InvalidArgument,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Io { .. } => CxrStatus::Io,
            Error::Decode { .. } | Error::UnsupportedFormat { .. } | Error::Encode(_) => {
                CxrStatus::Decode
            }
            Error::Config { .. } | Error::ConfigParse { .. } | Error::NoScales => CxrStatus::Config,
            Error::Asymmetry { .. } => CxrStatus::Numeric,
            _ => CxrStatus::InvalidArgument,
        };
        Self {
            status,
            message: err.to_string(),
        }
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

pub(crate) fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Runs `body`, converting errors and panics into a status code and
/// recording the message for [`cxr_last_error_message`].
pub(crate) fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CxrStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CxrStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            set_last_error(&format!("panic: {message}"));
            CxrStatus::Panic
        }
    }
}

/// Message of the most recent failure on the calling thread, or NULL.
///
/// The pointer stays valid until the next `cxr_*` call on the same thread.
#[no_mangle]
pub extern "C" fn cxr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

#[cfg(test)]
mod tests {
    use std::ffi::CStr;

    use super::*;

    fn message() -> String {
        let p = cxr_last_error_message();
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    #[test]
    fn panics_become_a_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, CxrStatus::Panic);
        assert_eq!(message(), "panic: boom");
        assert_eq!(guard(|| Ok(())), CxrStatus::Ok);
        assert!(cxr_last_error_message().is_null());
    }

    #[test]
    fn interior_nul_is_replaced() {
        guard(|| Err(Failure::invalid("a\0b")));
        assert_eq!(message(), "a b");
    }
}
