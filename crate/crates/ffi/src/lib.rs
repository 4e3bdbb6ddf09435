//! C ABI over the policy engine.
//!
//! Every function returns an [`SpfStatus`]; on failure the message is
//! available from [`spf_last_error_message`] on the same thread. Strings
//! handed out through `out` parameters are owned by the caller and must be
//! released with [`spf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ssn_policy_forge::monitor::{Engine, EngineError, Scenario};
use ssn_policy_forge::policy::{serialize_query, Policy};
use ssn_policy_forge::sim::{SimError, WorldEvent};

/// Opaque engine handle.
pub struct SpfEngine {
    inner: Engine,
}

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidPolicy = 4,
    NotFound = 5,
    InvalidInput = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SpfStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(SpfStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<EngineError> for Failure {
    fn from(err: EngineError) -> Self {
        let status = match &err {
            EngineError::Policy { .. } => SpfStatus::InvalidPolicy,
            EngineError::UnknownPolicy(_)
            | EngineError::Sim(SimError::UnknownTunnel(_) | SimError::UnknownWorker(_)) => SpfStatus::NotFound,
            _ => SpfStatus::InvalidInput,
        };
        Failure(status, err.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Failure(SpfStatus::InvalidJson, err.to_string())
    }
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SpfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            SpfStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {message}"));
            SpfStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure(SpfStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn engine<'a>(ptr: *mut SpfEngine) -> Result<&'a mut Engine, Failure> {
    ptr.as_mut()
        .map(|e| &mut e.inner)
        .ok_or_else(|| Failure::null("engine"))
}

unsafe fn hand_out(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    let value = CString::new(value).map_err(|e| Failure(SpfStatus::InvalidInput, e.to_string()))?;
    *out = value.into_raw();
    Ok(())
}

unsafe fn hand_out_engine(out: *mut *mut SpfEngine, inner: Engine) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = Box::into_raw(Box::new(SpfEngine { inner }));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn spf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn spf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Engine over the bundled mine, ontology and rules.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_new(seed: u64, out: *mut *mut SpfEngine) -> SpfStatus {
    guard(|| hand_out_engine(out, Engine::with_defaults(seed)?))
}

/// Engine built from a scenario document. When `has_seed` is false the
/// scenario's own seed is used.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_from_scenario(
    json: *const c_char,
    seed: u64,
    has_seed: bool,
    out: *mut *mut SpfEngine,
) -> SpfStatus {
    guard(|| {
        let scenario = Scenario::from_json(text(json, "json")?)?;
        hand_out_engine(out, scenario.build(has_seed.then_some(seed))?)
    })
}

/// Destroy an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_free(engine: *mut SpfEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Install or replace a policy given as JSON.
///
/// # Safety
/// `engine` must be a live handle; `policy_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_upsert_policy(engine: *mut SpfEngine, policy_json: *const c_char) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let policy: Policy = serde_json::from_str(text(policy_json, "policy_json")?)?;
        engine.upsert_policy(policy)?;
        Ok(())
    })
}

/// Uninstall a policy by id.
///
/// # Safety
/// `engine` must be a live handle; `id` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_remove_policy(engine: *mut SpfEngine, id: *const c_char) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        engine.remove_policy(text(id, "id")?)?;
        Ok(())
    })
}

/// Start a world event (gas leak or fire) at the current tick.
///
/// # Safety
/// `engine` must be a live handle; `event_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_inject_event(engine: *mut SpfEngine, event_json: *const c_char) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let event: WorldEvent = serde_json::from_str(text(event_json, "event_json")?)?;
        engine.inject_event(event)?;
        Ok(())
    })
}

/// Advance `n` ticks. The new world tick is written to `tick_out` when it
/// is not null.
///
/// # Safety
/// `engine` must be a live handle; `tick_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_step(engine: *mut SpfEngine, n: u64, tick_out: *mut u64) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        engine.run(n);
        if let Some(out) = tick_out.as_mut() {
            *out = engine.world().tick();
        }
        Ok(())
    })
}

/// Rebuild the world. When `has_seed` is false the current seed is kept.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_reset(engine: *mut SpfEngine, seed: u64, has_seed: bool) -> SpfStatus {
    guard(|| {
        self::engine(engine)?.reset(has_seed.then_some(seed))?;
        Ok(())
    })
}

/// Trigger log entries with `tick >= since` as a JSON array.
///
/// # Safety
/// `engine` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_log_json(engine: *mut SpfEngine, since: u64, out: *mut *mut c_char) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        hand_out(out, serde_json::to_string(engine.log_since(since))?)
    })
}

/// World snapshot (tick, tunnels, workers, events, fences) as JSON.
///
/// # Safety
/// `engine` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_state_json(engine: *mut SpfEngine, out: *mut *mut c_char) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        hand_out(out, serde_json::to_string(&engine.world().snapshot())?)
    })
}

/// ACAs matching a keyword query as a JSON array. An empty query lists all.
///
/// # Safety
/// `engine` must be a live handle; `query` a NUL-terminated string; `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_search_acas(
    engine: *mut SpfEngine,
    query: *const c_char,
    out: *mut *mut c_char,
) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let hits = engine.catalog().search(text(query, "query")?);
        hand_out(out, serde_json::to_string(&hits)?)
    })
}

/// SPARQL text of an installed policy.
///
/// # Safety
/// `engine` must be a live handle; `id` a NUL-terminated string; `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_engine_policy_query(
    engine: *mut SpfEngine,
    id: *const c_char,
    out: *mut *mut c_char,
) -> SpfStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let id = text(id, "id")?;
        let query = engine
            .compiled(id)
            .ok_or_else(|| Failure::from(EngineError::UnknownPolicy(id.to_string())))?;
        hand_out(out, serialize_query(query))
    })
}
