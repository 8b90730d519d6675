//! C ABI over `hems-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or a run
//! call and released with the matching `*_free`. Fallible calls return a
//! [`HemsStatus`]; on failure [`hems_last_error`] describes the cause. Panics
//! are caught and reported as [`HemsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hems_core::controller::{priority_stack, thermostat, ControllerKind};
use hems_core::data_io::synth_scenario;
use hems_core::domain::ScenarioConfig;
use hems_core::milp::{solve_milp, MilpError, MilpProblem, MilpStatus, Sense, SolverControls};
use hems_core::sim::{simulate, RunResult};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HemsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Simulation = 4,
    Solver = 5,
    /// The solver hit its limit before finding any integer point.
    NoIncumbent = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HemsController {
    Baseline = 0,
    RuleBased = 1,
    Mpc = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HemsSense {
    Le = 0,
    Eq = 1,
    Ge = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HemsMilpStatus {
    Optimal = 0,
    TimeLimit = 1,
    NodeLimit = 2,
    Infeasible = 3,
    Unbounded = 4,
}

/// Run metrics. Undefined ratios are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HemsMetrics {
    pub lrm_cri: f64,
    pub lrm_o: f64,
    pub trm_h: f64,
    pub trip_steps: u64,
    /// NaN for controllers that do not solve anything.
    pub mean_solve_ms: f64,
    pub fallback_steps: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HemsMilpResult {
    pub status: HemsMilpStatus,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_time_s: f64,
}

/// Opaque scenario configuration.
pub struct HemsConfig {
    inner: ScenarioConfig,
}

/// Opaque finished simulation.
pub struct HemsRun {
    inner: RunResult,
}

/// Opaque MILP under construction.
pub struct HemsMilp {
    inner: MilpProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (HemsStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HemsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HemsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside hems");
            HemsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (HemsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (HemsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hems_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default configuration (all grid factors 1, `alpha_i` 4).
#[no_mangle]
pub extern "C" fn hems_config_new() -> *mut HemsConfig {
    Box::into_raw(Box::new(HemsConfig { inner: ScenarioConfig::default() }))
}

/// # Safety
/// `cfg` must come from [`hems_config_new`] and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn hems_config_free(cfg: *mut HemsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Set one configuration key, written as in a TOML config file
/// (`value` is a TOML literal, e.g. `"0.5"` or `"36"`).
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hems_config_set(cfg: *mut HemsConfig, key: *const c_char, value: *const c_char) -> HemsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.inner.set_key(key, value).map_err(|e| (HemsStatus::Config, e.to_string()))
    })
}

/// Switch to desk-scale MPC settings.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hems_config_desk(cfg: *mut HemsConfig) -> HemsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        cfg.inner = cfg.inner.desk();
        Ok(())
    })
}

/// Simulate `days` of synthetic data from `seed` with a [`HemsController`]
/// value. On success `*out` owns a new run handle.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hems_run_synthetic(
    cfg: *const HemsConfig,
    controller: i32,
    seed: u64,
    days: u32,
    out: *mut *mut HemsRun,
) -> HemsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = &cfg.as_ref().ok_or_else(|| null("cfg"))?.inner;
        if days == 0 {
            return Err((HemsStatus::InvalidArgument, "days must be at least 1".into()));
        }
        cfg.validate().map_err(|e| (HemsStatus::Config, e.to_string()))?;
        let kind = match controller {
            c if c == HemsController::Baseline as i32 => ControllerKind::Baseline,
            c if c == HemsController::RuleBased as i32 => ControllerKind::RuleBased,
            c if c == HemsController::Mpc as i32 => ControllerKind::Mpc,
            other => return Err((HemsStatus::InvalidArgument, format!("unknown controller {other}"))),
        };
        let series = synth_scenario(seed, days as usize, cfg.n_circuits, cfg.step_hours);
        let r = simulate(kind, cfg, &series.records).map_err(|e| (HemsStatus::Simulation, e.to_string()))?;
        *out = Box::into_raw(Box::new(HemsRun { inner: r }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`hems_run_synthetic`] and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn hems_run_free(run: *mut HemsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hems_run_metrics(run: *const HemsRun, out: *mut HemsMetrics) -> HemsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = &run.inner.metrics;
        *out = HemsMetrics {
            lrm_cri: m.lrm_cri.unwrap_or(f64::NAN),
            lrm_o: m.lrm_o.unwrap_or(f64::NAN),
            trm_h: m.trm_h,
            trip_steps: m.trip_steps as u64,
            mean_solve_ms: m.mean_solve_ms.unwrap_or(f64::NAN),
            fallback_steps: m.fallback_steps as u64,
        };
        Ok(())
    })
}

/// Number of simulated steps, 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hems_run_len(run: *const HemsRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.trajectory.len())
}

/// Copy the post-step house temperature and battery energy of the first
/// `len` steps. Either output may be null.
///
/// # Safety
/// `run` must be a live handle; non-null outputs must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hems_run_states(run: *const HemsRun, t_house_c: *mut f64, e_bat_kwh: *mut f64, len: usize) -> HemsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let steps = &run.inner.trajectory.steps;
        if len > steps.len() {
            return Err((HemsStatus::InvalidArgument, format!("len {len} exceeds {} steps", steps.len())));
        }
        if !t_house_c.is_null() {
            let t = slice::from_raw_parts_mut(t_house_c, len);
            for (dst, s) in t.iter_mut().zip(steps) {
                *dst = s.state().t_house_c;
            }
        }
        if !e_bat_kwh.is_null() {
            let e = slice::from_raw_parts_mut(e_bat_kwh, len);
            for (dst, s) in e.iter_mut().zip(steps) {
                *dst = s.state().e_bat_kwh;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hems_milp_new() -> *mut HemsMilp {
    Box::into_raw(Box::new(HemsMilp { inner: MilpProblem::new() }))
}

/// # Safety
/// `p` must come from [`hems_milp_new`] and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn hems_milp_free(p: *mut HemsMilp) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Append a column; `*index` receives its position. Binary columns ignore
/// the bounds and use [0, 1].
///
/// # Safety
/// `p` must be a live handle; `index` may be null.
#[no_mangle]
pub unsafe extern "C" fn hems_milp_add_column(
    p: *mut HemsMilp,
    lower: f64,
    upper: f64,
    cost: f64,
    binary: bool,
    index: *mut usize,
) -> HemsStatus {
    guard(|| {
        let p = &mut p.as_mut().ok_or_else(|| null("p"))?.inner;
        if lower.is_nan() || upper.is_nan() || lower > upper || !cost.is_finite() {
            return Err((HemsStatus::InvalidArgument, "bad column bounds or cost".into()));
        }
        let j = if binary { p.add_binary(cost) } else { p.add_column(lower, upper, cost) };
        if let Some(i) = index.as_mut() {
            *i = j;
        }
        Ok(())
    })
}

/// Append the row `sum(coeffs[i] * x[cols[i]]) <sense> rhs`, `sense` being a
/// [`HemsSense`] value.
///
/// # Safety
/// `p` must be a live handle; `cols` and `coeffs` must hold `nnz` values.
#[no_mangle]
pub unsafe extern "C" fn hems_milp_add_row(
    p: *mut HemsMilp,
    cols: *const usize,
    coeffs: *const f64,
    nnz: usize,
    sense: i32,
    rhs: f64,
) -> HemsStatus {
    guard(|| {
        let p = &mut p.as_mut().ok_or_else(|| null("p"))?.inner;
        if nnz > 0 && (cols.is_null() || coeffs.is_null()) {
            return Err(null("cols or coeffs"));
        }
        let (cols, coeffs) = if nnz == 0 { (&[][..], &[][..]) } else { (slice::from_raw_parts(cols, nnz), slice::from_raw_parts(coeffs, nnz)) };
        if let Some(&j) = cols.iter().find(|&&j| j >= p.num_cols()) {
            return Err((HemsStatus::InvalidArgument, format!("column {j} does not exist")));
        }
        let sense = match sense {
            s if s == HemsSense::Le as i32 => Sense::Le,
            s if s == HemsSense::Eq as i32 => Sense::Eq,
            s if s == HemsSense::Ge as i32 => Sense::Ge,
            other => return Err((HemsStatus::InvalidArgument, format!("unknown sense {other}"))),
        };
        p.add_row(cols.iter().copied().zip(coeffs.iter().copied()).collect(), sense, rhs);
        Ok(())
    })
}

/// Solve the problem. `node_limit` 0 means no node cap. When `columns` is
/// not null it receives `ncols` values, which must equal the column count.
///
/// # Safety
/// `p` must be a live handle, `out` valid, `columns` null or `ncols` long.
#[no_mangle]
pub unsafe extern "C" fn hems_milp_solve(
    p: *const HemsMilp,
    mip_gap: f64,
    time_limit_s: f64,
    node_limit: u64,
    out: *mut HemsMilpResult,
    columns: *mut f64,
    ncols: usize,
) -> HemsStatus {
    guard(|| {
        let p = &p.as_ref().ok_or_else(|| null("p"))?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !columns.is_null() && ncols != p.num_cols() {
            return Err((HemsStatus::InvalidArgument, format!("ncols is {ncols}, problem has {}", p.num_cols())));
        }
        if !(mip_gap >= 0.0) || !(time_limit_s >= 0.0) {
            return Err((HemsStatus::InvalidArgument, "mip_gap and time_limit_s must be nonnegative".into()));
        }
        let controls = SolverControls::new(mip_gap, time_limit_s).with_node_limit((node_limit > 0).then_some(node_limit as usize));
        let sol = solve_milp(p, &controls).map_err(|e| match e {
            MilpError::NoIncumbentAtTimeout { .. } => (HemsStatus::NoIncumbent, e.to_string()),
            MilpError::InvalidProblem(_) => (HemsStatus::InvalidArgument, e.to_string()),
            MilpError::NumericInstability(_) => (HemsStatus::Solver, e.to_string()),
        })?;
        *out = HemsMilpResult {
            status: match sol.status {
                MilpStatus::Optimal => HemsMilpStatus::Optimal,
                MilpStatus::TimeLimit => HemsMilpStatus::TimeLimit,
                MilpStatus::NodeLimit => HemsMilpStatus::NodeLimit,
                MilpStatus::Infeasible => HemsMilpStatus::Infeasible,
                MilpStatus::Unbounded => HemsMilpStatus::Unbounded,
            },
            objective: sol.objective,
            bound: sol.bound,
            gap: sol.gap,
            nodes: sol.nodes as u64,
            wall_time_s: sol.wall_time_s,
        };
        if !columns.is_null() {
            slice::from_raw_parts_mut(columns, ncols).copy_from_slice(&sol.columns);
        }
        Ok(())
    })
}

/// Circuit bits (0/1) for an energy budget over `n` demands in priority order.
///
/// # Safety
/// `demands` and `bits` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn hems_priority_stack(budget_kwh: f64, demands: *const f64, n: usize, bits: *mut u8) -> HemsStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        if demands.is_null() || bits.is_null() {
            return Err(null("demands or bits"));
        }
        let on = priority_stack(budget_kwh, slice::from_raw_parts(demands, n));
        for (dst, u) in slice::from_raw_parts_mut(bits, n).iter_mut().zip(on) {
            *dst = u8::from(u);
        }
        Ok(())
    })
}

/// Hysteresis thermostat: on at or above `t_upper_c`, off at or below
/// `t_lower_c`, otherwise `ac_prev`.
#[no_mangle]
pub extern "C" fn hems_thermostat(t_house_c: f64, ac_prev: bool, t_upper_c: f64, t_lower_c: f64) -> bool {
    thermostat(t_house_c, ac_prev, t_upper_c, t_lower_c)
}
