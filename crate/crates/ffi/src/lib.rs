//! C interface. Instances and solutions are opaque handles owned by the
//! caller and released with the matching `_free` function. Every fallible
//! call returns an [`FpStatus`]; on failure [`fp_last_error_message`] holds a
//! description for the calling thread. Strings returned through `char **`
//! out-parameters are released with [`fp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use floorplan::instances::{named_instance, NamedInstanceId};
use floorplan::io::{instance_from_json, solution_to_json};
use floorplan::model::Instance;
use floorplan::pipeline::{default_backend, solve, Mode, MultiFloorSolution, PipelineConfig, PipelineError};
use floorplan::render::render_svg;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    /// A required pointer was null or an option was out of range.
    InvalidArgument = 1,
    /// Unreadable file, malformed document or unknown name.
    ParseError = 2,
    /// The rooms cannot be placed.
    Infeasible = 3,
    /// The time limit passed without any solution.
    Timeout = 4,
    SolverError = 5,
    RenderError = 6,
    /// A bug inside the library; the handle arguments remain valid.
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpMode {
    Global = 0,
    SplitIlp = 1,
    SplitHeuristic = 2,
}

/// Options for [`fp_solve`]. Non-positive limits select the defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FpSolveOptions {
    pub mode: FpMode,
    /// Seconds per floor-planning solve.
    pub time_limit: f64,
    /// Seconds for the floor-assignment solve.
    pub fa_time_limit: f64,
}

/// Opaque instance handle.
pub struct FpInstance {
    inner: Instance,
}

/// Opaque solution handle; keeps a copy of its instance.
pub struct FpSolution {
    instance: Instance,
    solution: MultiFloorSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (FpStatus, String)>) -> FpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (FpStatus, String)> {
    if s.is_null() {
        return Err((FpStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (FpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn check_out<T>(out: *mut *mut T) -> Result<(), (FpStatus, String)> {
    if out.is_null() {
        Err((FpStatus::InvalidArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn give_string(out: *mut *mut c_char, s: String) -> Result<(), (FpStatus, String)> {
    check_out(out)?;
    let c = CString::new(s).map_err(|_| (FpStatus::SolverError, "string contains a nul byte".to_string()))?;
    // SAFETY: `out` is non-null and points to writable storage per the contract.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn give_instance(out: *mut *mut FpInstance, inner: Instance) {
    // SAFETY: callers checked `out` with `check_out`.
    unsafe { *out = Box::into_raw(Box::new(FpInstance { inner })) };
}

/// Parses a `floorplan/1` document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_instance_from_json(json: *const c_char, out: *mut *mut FpInstance) -> FpStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(json, "json")?;
        let inst = instance_from_json(text).map_err(|e| (FpStatus::ParseError, e.to_string()))?;
        give_instance(out, inst);
        Ok(())
    })
}

/// Reads a `floorplan/1` document from a file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_instance_load(path: *const c_char, out: *mut *mut FpInstance) -> FpStatus {
    guard(|| {
        check_out(out)?;
        let path = read_str(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| (FpStatus::ParseError, format!("{path}: {e}")))?;
        let inst = instance_from_json(&text).map_err(|e| (FpStatus::ParseError, format!("{path}: {e}")))?;
        give_instance(out, inst);
        Ok(())
    })
}

/// One of the six named instances, such as `"sM-3M"`.
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_instance_named(name: *const c_char, out: *mut *mut FpInstance) -> FpStatus {
    guard(|| {
        check_out(out)?;
        let name = read_str(name, "name")?;
        let id: NamedInstanceId = name.parse().map_err(|e: String| (FpStatus::ParseError, e))?;
        give_instance(out, named_instance(id));
        Ok(())
    })
}

/// Number of floors and rooms of an instance.
///
/// # Safety
/// `instance` must come from this library; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_instance_size(instance: *const FpInstance, floors: *mut u32, rooms: *mut u32) -> FpStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or((FpStatus::InvalidArgument, "instance is null".to_string()))?;
        if floors.is_null() || rooms.is_null() {
            return Err((FpStatus::InvalidArgument, "output pointer is null".into()));
        }
        *floors = inst.inner.building.num_floors() as u32;
        *rooms = inst.inner.total_rooms();
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `instance` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fp_instance_free(instance: *mut FpInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

fn status_of(e: &PipelineError) -> FpStatus {
    use floorplan::fa::FaError;
    use floorplan::fp::FpError;
    use floorplan::heuristic::HeuristicError;
    match e {
        PipelineError::Config(_) => FpStatus::InvalidArgument,
        PipelineError::Model(_) => FpStatus::ParseError,
        PipelineError::Infeasible
        | PipelineError::Floor { .. }
        | PipelineError::Fp(FpError::InfeasibleByArea { .. })
        | PipelineError::Fa(FaError::Infeasible | FaError::InfeasibleByArea { .. })
        | PipelineError::Heuristic(HeuristicError::InfeasibleByArea { .. } | HeuristicError::Overfill { .. }) => {
            FpStatus::Infeasible
        }
        PipelineError::NoIncumbent => FpStatus::Timeout,
        _ => FpStatus::SolverError,
    }
}

/// Solves an instance. `options` may be null for a global solve with default
/// limits. The solver is chosen as by the command-line tool.
///
/// # Safety
/// `instance` must come from this library; `options`, if non-null, and `out`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fp_solve(
    instance: *const FpInstance,
    options: *const FpSolveOptions,
    out: *mut *mut FpSolution,
) -> FpStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance.as_ref().ok_or((FpStatus::InvalidArgument, "instance is null".to_string()))?;
        let mut config = PipelineConfig::default();
        if let Some(o) = options.as_ref() {
            config.mode = match o.mode {
                FpMode::Global => Mode::Global,
                FpMode::SplitIlp => Mode::SplitIlp,
                FpMode::SplitHeuristic => Mode::SplitHeuristic,
            };
            if o.time_limit > 0.0 {
                config.time_limit = o.time_limit;
            }
            if o.fa_time_limit > 0.0 {
                config.fa_time_limit = o.fa_time_limit;
            }
        }
        let backend = default_backend();
        let solution = solve(&inst.inner, &config, backend.as_ref()).map_err(|e| (status_of(&e), e.to_string()))?;
        *out = Box::into_raw(Box::new(FpSolution { instance: config.apply(&inst.inner), solution }));
        Ok(())
    })
}

/// Proximity cost of a solution over the whole building.
///
/// # Safety
/// `solution` must come from this library and `cost` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_cost(solution: *const FpSolution, cost: *mut f64) -> FpStatus {
    guard(|| {
        let s = solution.as_ref().ok_or((FpStatus::InvalidArgument, "solution is null".to_string()))?;
        if cost.is_null() {
            return Err((FpStatus::InvalidArgument, "output pointer is null".into()));
        }
        *cost = s.solution.cost;
        Ok(())
    })
}

/// The solution as a `floorplan-solution/1` document.
///
/// # Safety
/// `solution` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_to_json(solution: *const FpSolution, out: *mut *mut c_char) -> FpStatus {
    guard(|| {
        let s = solution.as_ref().ok_or((FpStatus::InvalidArgument, "solution is null".to_string()))?;
        give_string(out, solution_to_json(&s.solution, &s.instance))
    })
}

/// All floors of a solution as one SVG document.
///
/// # Safety
/// `solution` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_render_svg(solution: *const FpSolution, out: *mut *mut c_char) -> FpStatus {
    guard(|| {
        let s = solution.as_ref().ok_or((FpStatus::InvalidArgument, "solution is null".to_string()))?;
        let mut docs =
            render_svg(&s.solution, &s.instance, false).map_err(|e| (FpStatus::RenderError, e.to_string()))?;
        give_string(out, docs.remove(0))
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_free(solution: *mut FpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
