//! C ABI over the `ntopics` library: load a trained model from disk,
//! inspect its topics, and infer topic mixtures for new text from non-Rust
//! callers.
//!
//! Conventions, mirrored in the generated `include/ntopics.h`:
//!
//! - A model is an opaque [`NtModel`] handle created by [`nt_model_open`]
//!   and released by [`nt_model_free`]. Handles are immutable after open,
//!   so one handle may be shared across threads for reading.
//! - Fallible calls return an [`NtStatus`]. On any status other than `OK`,
//!   [`nt_last_error_message`] returns a thread-local description of what
//!   went wrong.
//! - Strings returned through out-parameters are allocated by Rust and must
//!   be released with [`nt_string_free`].
//! - Panics never cross the boundary; they are caught and reported as
//!   `PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use ntopics::analytics::round_sig12;
use ntopics::lda::{infer, load_model, InferOptions, TrainedModel};
use ntopics::preprocess::{preprocess_text, StopwordPolicy};
use ntopics::Error;

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The model file could not be opened or read.
    Io = 3,
    /// The model file is not a valid serialized model.
    Parse = 4,
    /// The model or a derived value failed an internal consistency check.
    Data = 5,
    /// An argument value is out of range for this model.
    InvalidArgument = 6,
    /// A caller-provided buffer has the wrong length.
    BufferTooSmall = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

/// An opened topic model plus the text-preprocessing policy applied to
/// inference queries.
pub struct NtModel {
    model: TrainedModel,
    policy: StopwordPolicy,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    // NUL bytes cannot survive into a CString; replace rather than fail.
    let sanitized = message.replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs were replaced");
    });
}

fn fail(status: NtStatus, message: &str) -> NtStatus {
    set_error(message);
    status
}

fn status_for(error: &Error) -> NtStatus {
    match error {
        Error::Config(_) => NtStatus::InvalidArgument,
        Error::Io { .. } => NtStatus::Io,
        Error::Format { .. } => NtStatus::Parse,
        Error::Csv { .. } | Error::Data(_) => NtStatus::Data,
    }
}

fn guarded(f: impl FnOnce() -> NtStatus) -> NtStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NtStatus::Panic, "internal panic caught at the C boundary"),
    }
}

/// Opens a model file written by the `ntopics` trainer and stores a handle
/// in `*out_model`. On failure `*out_model` is untouched.
///
/// # Safety
/// `path` must point to a NUL-terminated string and `out_model` to writable
/// memory for one pointer. The returned handle must be released exactly
/// once with [`nt_model_free`].
#[no_mangle]
pub unsafe extern "C" fn nt_model_open(
    path: *const c_char,
    out_model: *mut *mut NtModel,
) -> NtStatus {
    guarded(|| {
        if path.is_null() || out_model.is_null() {
            return fail(NtStatus::NullArgument, "path and out_model must be non-NULL");
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(path) => path,
            Err(_) => return fail(NtStatus::InvalidUtf8, "path is not valid UTF-8"),
        };
        let file = match File::open(path) {
            Ok(file) => file,
            Err(e) => return fail(NtStatus::Io, &format!("cannot open {path}: {e}")),
        };
        match load_model(BufReader::new(file)) {
            Ok(model) => {
                let handle = NtModel { model, policy: StopwordPolicy::masking_only() };
                unsafe { *out_model = Box::into_raw(Box::new(handle)) };
                NtStatus::Ok
            }
            Err(e) => fail(status_for(&e), &e.to_string()),
        }
    })
}

/// Releases a handle returned by [`nt_model_open`]. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a handle from [`nt_model_open`] that has not
/// been freed before, and no other thread may be using it.
#[no_mangle]
pub unsafe extern "C" fn nt_model_free(model: *mut NtModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of topics in the model; 0 if `model` is NULL.
///
/// # Safety
/// `model` must be NULL or a live handle from [`nt_model_open`].
#[no_mangle]
pub unsafe extern "C" fn nt_model_num_topics(model: *const NtModel) -> u32 {
    match unsafe { model.as_ref() } {
        Some(handle) => handle.model.num_topics() as u32,
        None => 0,
    }
}

/// Number of vocabulary terms in the model; 0 if `model` is NULL.
///
/// # Safety
/// `model` must be NULL or a live handle from [`nt_model_open`].
#[no_mangle]
pub unsafe extern "C" fn nt_model_vocab_size(model: *const NtModel) -> u32 {
    match unsafe { model.as_ref() } {
        Some(handle) => handle.model.vocab_size() as u32,
        None => 0,
    }
}

/// Infers the topic mixture of one raw narrative and writes it to
/// `out_theta[0..theta_len]`.
///
/// The text goes through the same preprocessing as training input; tokens
/// outside the model vocabulary are skipped. When nothing usable remains,
/// the mixture is uniform at 1/K. `theta_len` must equal the model's topic
/// count. `sweeps` sets the length of the sampling chain; 0 means the
/// model's training default. Equal inputs with equal `seed` give
/// bit-identical output.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and
/// `out_theta` writable for `theta_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nt_infer_text(
    model: *const NtModel,
    text: *const c_char,
    sweeps: u32,
    seed: u64,
    out_theta: *mut f64,
    theta_len: usize,
) -> NtStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return fail(NtStatus::NullArgument, "model must be non-NULL");
        };
        if text.is_null() || out_theta.is_null() {
            return fail(NtStatus::NullArgument, "text and out_theta must be non-NULL");
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(text) => text,
            Err(_) => return fail(NtStatus::InvalidUtf8, "text is not valid UTF-8"),
        };
        let num_topics = handle.model.num_topics();
        if theta_len != num_topics {
            return fail(
                NtStatus::BufferTooSmall,
                &format!("theta_len is {theta_len} but the model has {num_topics} topics"),
            );
        }
        let terms = preprocess_text(text, &handle.policy);
        let options = InferOptions { sweeps: (sweeps > 0).then_some(sweeps), seed: Some(seed) };
        match infer(&handle.model, "ffi-query", &terms, &options) {
            Ok(outcome) => {
                let theta = &outcome.mixture.theta;
                unsafe { ptr::copy_nonoverlapping(theta.as_ptr(), out_theta, num_topics) };
                NtStatus::Ok
            }
            Err(e) => fail(status_for(&e), &e.to_string()),
        }
    })
}

/// Writes the `num_terms` most probable terms of one topic to `*out_json`
/// as a JSON array of `{"term": ..., "probability": ...}` objects in
/// descending probability order. `num_terms` larger than the vocabulary
/// returns the whole vocabulary.
///
/// # Safety
/// `model` must be a live handle and `out_json` writable for one pointer.
/// The returned string must be released with [`nt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nt_top_terms_json(
    model: *const NtModel,
    topic: u32,
    num_terms: usize,
    out_json: *mut *mut c_char,
) -> NtStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return fail(NtStatus::NullArgument, "model must be non-NULL");
        };
        if out_json.is_null() {
            return fail(NtStatus::NullArgument, "out_json must be non-NULL");
        }
        let words = match handle.model.top_words(topic, num_terms) {
            Ok(words) => words,
            Err(e) => return fail(status_for(&e), &e.to_string()),
        };
        let entries: Vec<serde_json::Value> = words
            .into_iter()
            .map(|(term, probability)| {
                serde_json::json!({
                    "term": term,
                    "probability": serde_json::Number::from_f64(round_sig12(probability))
                        .expect("probabilities are finite"),
                })
            })
            .collect();
        let json = serde_json::Value::Array(entries).to_string();
        let c_string = CString::new(json).expect("serde_json output has no NUL bytes");
        unsafe { *out_json = c_string.into_raw() };
        NtStatus::Ok
    })
}

/// Releases a string returned through an out-parameter of this API. NULL
/// is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this API that has not been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn nt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message of the most recent failing call on this thread, NUL-terminated;
/// the empty string if nothing failed yet. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
