//! C interface to the bml laboratory.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`BmlStatus`]; the message of the last failure on the calling thread is
//! available through [`bml_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bml::littlewood_paley::{besov_norm, BesovParams};
use bml::measures::{bl_distance, Atom, AtomicMeasure};
use bml::solver::{run, DiagnosticsRow, RunOptions, RunOutput, Scenario, StepConfig};
use bml::spectral::{Grid, RealField};
use bml::BmlError;

/// Result codes. Values 2 and 4 agree with the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BmlStatus {
    Ok = 0,
    /// A required pointer was null or a buffer too short.
    NullArgument = 1,
    /// Invalid parameter, grid, configuration or input data.
    InvalidArgument = 2,
    /// The solver aborted (CFL failure, non-finite values).
    Numerical = 4,
    /// Any other library error.
    Failure = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &BmlError) -> BmlStatus {
    match err.exit_code() {
        2 => BmlStatus::InvalidArgument,
        4 => BmlStatus::Numerical,
        _ => BmlStatus::Failure,
    }
}

/// Runs `body`, recording any error or panic.
fn guard(body: impl FnOnce() -> Result<(), (BmlStatus, String)>) -> BmlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            BmlStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside bml".into());
            BmlStatus::Panic
        }
    }
}

fn lib<T>(r: bml::Result<T>) -> Result<T, (BmlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BmlStatus, String) {
    (BmlStatus::NullArgument, format!("null pointer: {what}"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (BmlStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (BmlStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bml_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque finite atomic measure.
pub struct BmlMeasure {
    inner: AtomicMeasure,
}

/// Builds a measure from `count` atoms at `(xs[i], ys[i])` with weights `ws[i]`.
///
/// # Safety
/// The three arrays must hold `count` values; `out_measure` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bml_measure_new(
    xs: *const f64,
    ys: *const f64,
    ws: *const f64,
    count: usize,
    out_measure: *mut *mut BmlMeasure,
) -> BmlStatus {
    guard(|| {
        let slot = out(out_measure, "out_measure")?;
        *slot = ptr::null_mut();
        let (xs, ys, ws) = (slice(xs, count, "xs")?, slice(ys, count, "ys")?, slice(ws, count, "ws")?);
        let atoms = (0..count)
            .map(|i| Atom {
                position: [xs[i], ys[i]],
                weight: ws[i],
            })
            .collect();
        let inner = lib(AtomicMeasure::new(atoms))?;
        *slot = Box::into_raw(Box::new(BmlMeasure { inner }));
        Ok(())
    })
}

/// # Safety
/// `measure` must be null or a handle from [`bml_measure_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bml_measure_free(measure: *mut BmlMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Number of atoms; 0 for a null handle.
///
/// # Safety
/// `measure` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bml_measure_len(measure: *const BmlMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.inner.len())
}

/// Total variation `sum |w_i|`.
///
/// # Safety
/// `measure` must be a live handle and `out_tv` writable.
#[no_mangle]
pub unsafe extern "C" fn bml_measure_total_variation(measure: *const BmlMeasure, out_tv: *mut f64) -> BmlStatus {
    guard(|| {
        let m = measure.as_ref().ok_or_else(|| null("measure"))?;
        *out(out_tv, "out_tv")? = m.inner.total_variation();
        Ok(())
    })
}

/// Bounded-Lipschitz distance between two measures.
///
/// # Safety
/// Both handles must be live and `out_distance` writable.
#[no_mangle]
pub unsafe extern "C" fn bml_bl_distance(
    first: *const BmlMeasure,
    second: *const BmlMeasure,
    out_distance: *mut f64,
) -> BmlStatus {
    guard(|| {
        let a = first.as_ref().ok_or_else(|| null("first"))?;
        let b = second.as_ref().ok_or_else(|| null("second"))?;
        *out(out_distance, "out_distance")? = lib(bl_distance(&a.inner, &b.inner))?;
        Ok(())
    })
}

/// Besov norm `B^s_{p,r}` of a grid field stored row-major (`n * n` values)
/// on the box `[-half_length, half_length)^2`. Pass `INFINITY` for `p` or `r`
/// to select the sup norm.
///
/// # Safety
/// `values` must hold `n * n` doubles and `out_norm` be writable.
#[no_mangle]
pub unsafe extern "C" fn bml_besov_norm(
    values: *const f64,
    n: usize,
    half_length: f64,
    s: f64,
    p: f64,
    r: f64,
    out_norm: *mut f64,
) -> BmlStatus {
    guard(|| {
        let slot = out(out_norm, "out_norm")?;
        let grid = lib(Grid::new(n, half_length))?;
        let data = slice(values, n.saturating_mul(n), "values")?;
        let field = lib(RealField::new(grid, data.to_vec(), "field"))?;
        *slot = lib(besov_norm(&field, lib(BesovParams::new(s, p, r))?))?;
        Ok(())
    })
}

/// Opaque solver session: a preset scenario on a fixed grid plus the result
/// of its latest run.
pub struct BmlSolver {
    scenario: Scenario,
    grid: Grid,
    step: StepConfig,
    sigma: f64,
    output: Option<RunOutput>,
}

/// Creates a solver for a named scenario (`single_atom`, `two_atom`,
/// `rotation_test`).
///
/// # Safety
/// `scenario` must be a NUL-terminated string and `out_solver` writable.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_new(
    scenario: *const c_char,
    n: usize,
    half_length: f64,
    dt: f64,
    n_mollify: u32,
    sigma: f64,
    out_solver: *mut *mut BmlSolver,
) -> BmlStatus {
    guard(|| {
        let slot = out(out_solver, "out_solver")?;
        *slot = ptr::null_mut();
        if scenario.is_null() {
            return Err(null("scenario"));
        }
        let name = CStr::from_ptr(scenario)
            .to_str()
            .map_err(|_| (BmlStatus::InvalidArgument, "scenario name is not UTF-8".to_string()))?;
        let scenario: Scenario = lib(name.parse())?;
        let grid = lib(Grid::new(n, half_length))?;
        let step = lib(StepConfig::new(dt, n_mollify))?;
        // reject bad data and under-resolved mollifiers now rather than at run time
        let data = lib(scenario.initial_data(grid))?;
        lib(bml::solver::SolverState::new(&data, n_mollify))?;
        lib(RunOptions::new(1.0, step.clone(), sigma).validate())?;
        *slot = Box::into_raw(Box::new(BmlSolver {
            scenario,
            grid,
            step,
            sigma,
            output: None,
        }));
        Ok(())
    })
}

/// # Safety
/// `solver` must be null or a handle from [`bml_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_free(solver: *mut BmlSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Runs the scenario from its initial data to `t_final`, replacing any
/// earlier result.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_run(solver: *mut BmlSolver, t_final: f64) -> BmlStatus {
    guard(|| {
        let s = solver.as_mut().ok_or_else(|| null("solver"))?;
        s.output = None;
        let data = lib(s.scenario.initial_data(s.grid))?;
        let opts = RunOptions::new(t_final, s.step.clone(), s.sigma);
        s.output = Some(lib(run(&data, &opts))?);
        Ok(())
    })
}

unsafe fn finished<'a>(solver: *const BmlSolver) -> Result<&'a RunOutput, (BmlStatus, String)> {
    let s = solver.as_ref().ok_or_else(|| null("solver"))?;
    s.output
        .as_ref()
        .ok_or_else(|| (BmlStatus::InvalidArgument, "solver has not run yet".to_string()))
}

/// Number of diagnostics rows of the latest run (steps + 1); 0 before a run.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_row_count(solver: *const BmlSolver) -> usize {
    solver
        .as_ref()
        .and_then(|s| s.output.as_ref())
        .map_or(0, |o| o.rows.len())
}

const DIAGNOSTICS_WIDTH: usize = 19;
const _: fn(&DiagnosticsRow) -> [f64; DIAGNOSTICS_WIDTH] = DiagnosticsRow::values;

/// Number of values per diagnostics row.
#[no_mangle]
pub extern "C" fn bml_diagnostics_width() -> usize {
    DIAGNOSTICS_WIDTH
}

/// Copies diagnostics row `index` (columns in `diagnostics.csv` order) into
/// `out_values`, which must hold [`bml_diagnostics_width`] doubles.
///
/// # Safety
/// `solver` must be a live handle and `out_values` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_row(
    solver: *const BmlSolver,
    index: usize,
    out_values: *mut f64,
    len: usize,
) -> BmlStatus {
    guard(|| {
        let o = finished(solver)?;
        let row = o
            .rows
            .get(index)
            .ok_or_else(|| (BmlStatus::InvalidArgument, format!("row {index} out of range ({})", o.rows.len())))?;
        let values = row.values();
        if out_values.is_null() || len < values.len() {
            return Err((BmlStatus::NullArgument, format!("row buffer needs {} doubles", values.len())));
        }
        std::slice::from_raw_parts_mut(out_values, values.len()).copy_from_slice(&values);
        Ok(())
    })
}

/// Copies the final temperature (`n * n` values, row-major) into `out_values`.
///
/// # Safety
/// `solver` must be a live handle and `out_values` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_theta(solver: *const BmlSolver, out_values: *mut f64, len: usize) -> BmlStatus {
    guard(|| {
        let o = finished(solver)?;
        let theta = o.state.theta.to_real("theta");
        let values = theta.values();
        if out_values.is_null() || len < values.len() {
            return Err((BmlStatus::NullArgument, format!("field buffer needs {} doubles", values.len())));
        }
        std::slice::from_raw_parts_mut(out_values, values.len()).copy_from_slice(values);
        Ok(())
    })
}

/// Final atom measure of the latest run as a new handle owned by the caller.
///
/// # Safety
/// `solver` must be a live handle and `out_measure` writable.
#[no_mangle]
pub unsafe extern "C" fn bml_solver_atoms(solver: *const BmlSolver, out_measure: *mut *mut BmlMeasure) -> BmlStatus {
    guard(|| {
        let slot = out(out_measure, "out_measure")?;
        *slot = ptr::null_mut();
        let o = finished(solver)?;
        *slot = Box::into_raw(Box::new(BmlMeasure {
            inner: o.state.atoms.clone(),
        }));
        Ok(())
    })
}
