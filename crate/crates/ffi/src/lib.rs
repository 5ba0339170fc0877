//! C interface to the stratified-algebra engine.
//!
//! Models live behind opaque `SaModel` handles. Every fallible call returns an
//! `SaStatus`; on failure `sa_last_error` describes what went wrong on the
//! calling thread. Results come back as NUL-terminated JSON owned by the
//! caller and released with `sa_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::{json, Value};
use stratified::algebra::models::{builtin_model, Builtin, ModelSpec, ParamSet};
use stratified::algebra::vector::Vector;
use stratified::axioms::{verify_axioms, SamplingPlan};
use stratified::field::FieldSpec;
use stratified::strata::Strata;
use stratified::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Precondition = 4,
    Arithmetic = 5,
    Panic = 6,
}

/// Opaque model handle.
pub struct SaModel {
    model: ModelSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DivisionByZero => SaStatus::Arithmetic,
            Error::NotBilinear
            | Error::ZeroVector
            | Error::EnumerationGuard { .. }
            | Error::RequiresPrimeField
            | Error::NoStrata(_)
            | Error::Precondition(_)
            | Error::DegreeGuard { .. } => SaStatus::Precondition,
            _ => SaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SaStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(m: *const SaModel) -> Result<&'a SaModel, Failure> {
    m.as_ref().ok_or_else(|| Failure(SaStatus::NullPointer, "model handle is null".into()))
}

unsafe fn emit(out: *mut *mut c_char, v: &Value) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SaStatus::NullPointer, "output pointer is null".into()));
    }
    let s = CString::new(v.to_string()).expect("json has no NUL");
    *out = s.into_raw();
    Ok(())
}

fn field_for(modulus: u64) -> Result<FieldSpec, Failure> {
    Ok(if modulus == 0 { FieldSpec::Rationals } else { FieldSpec::prime(modulus)? })
}

/// Builds a built-in model. `modulus` 0 selects the rationals. `params` may be
/// null, in which case seeded generic parameters are drawn from `seed`.
///
/// # Safety
/// `name` and non-null `params` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sa_model_builtin(
    name: *const c_char,
    params: *const c_char,
    modulus: u64,
    seed: u64,
    out: *mut *mut SaModel,
) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(SaStatus::NullPointer, "output pointer is null".into()));
        }
        let builtin: Builtin = text(name, "name")?.parse()?;
        let field = field_for(modulus)?;
        let params = if params.is_null() {
            builtin.needs_params().then(|| ParamSet::generic(field, seed))
        } else {
            Some(ParamSet::parse(field, text(params, "params")?)?)
        };
        let model = builtin_model(builtin, params.as_ref(), field)?;
        *out = Box::into_raw(Box::new(SaModel { model }));
        Ok(())
    })
}

/// Builds a model from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_model_from_json(json: *const c_char, out: *mut *mut SaModel) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(SaStatus::NullPointer, "output pointer is null".into()));
        }
        let model = ModelSpec::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(SaModel { model }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sa_model_free(model: *mut SaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serializes the model description.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_model_to_json(model: *const SaModel, out: *mut *mut c_char) -> SaStatus {
    guard(|| emit(out, &handle(model)?.model.to_json_value()))
}

/// Product `a * b`, vectors given as `"1,2,3"`. Output: `{"product": [...]}`.
///
/// # Safety
/// `model` must be a live handle, `a` and `b` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sa_multiply(
    model: *const SaModel,
    a: *const c_char,
    b: *const c_char,
    out: *mut *mut c_char,
) -> SaStatus {
    guard(|| {
        let m = &handle(model)?.model;
        let a = Vector::parse(m.field, text(a, "a")?)?;
        let b = Vector::parse(m.field, text(b, "b")?)?;
        let p = m.operation.multiply(&a, &b)?;
        emit(out, &json!({ "product": p }))
    })
}

/// Tensor associativity criterion. Output:
/// `{"associative": bool, "mismatches": [{"index": [i,j,k,l], "lhs", "rhs"}]}`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_check_associativity(model: *const SaModel, out: *mut *mut c_char) -> SaStatus {
    guard(|| {
        let m = &handle(model)?.model;
        let list = m.operation.associativity_mismatches()?;
        let items: Vec<Value> = list
            .iter()
            .map(|x| json!({"index": [x.index.0, x.index.1, x.index.2, x.index.3], "lhs": x.lhs, "rhs": x.rhs}))
            .collect();
        emit(out, &json!({ "associative": list.is_empty(), "mismatches": items }))
    })
}

/// Randomized axiom report over the model's declared strata.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_verify_axioms(
    model: *const SaModel,
    samples: u32,
    seed: u64,
    out: *mut *mut c_char,
) -> SaStatus {
    guard(|| {
        let m = &handle(model)?.model;
        let strata = Strata::for_model(m, false)?;
        let report = verify_axioms(m, &strata, &SamplingPlan::randomized(samples as usize, seed))?;
        emit(out, &report.to_json())
    })
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_status() {
        assert_eq!(Failure::from(Error::DivisionByZero).0, SaStatus::Arithmetic);
        assert_eq!(Failure::from(Error::NotBilinear).0, SaStatus::Precondition);
        assert_eq!(Failure::from(Error::UnknownModel("x".into())).0, SaStatus::InvalidArgument);
    }

    #[test]
    fn success_clears_last_error() {
        set_error("stale".into());
        assert!(!sa_last_error().is_null());
        assert_eq!(guard(|| Ok(())), SaStatus::Ok);
        assert!(sa_last_error().is_null());
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), SaStatus::Panic);
    }
}
