//! Receding-horizon controller over a mixed-integer model of the house.
//!
//! Each step the window `k = 0..N` is planned from the measured state and a
//! perfect forecast; only the first command is applied. Per window step the
//! model has seven continuous columns (`T_h(k+1)`, `E_bat(k+1)`, `Γ(k)`,
//! `E_l(k)`, `E_pv(k)`, `ζ_h(k)`, `ζ_l(k)`) and four binaries (`u_ac(k)`,
//! `f_on(k)`, `f_off(k)`, `θ_bat(k)`). `Γ > 0` discharges the battery.

use thiserror::Error;

use super::priority::priority_stack;
use super::rulebased::rulebased_step;
use crate::domain::{ControlCommand, DerivedParams, ExogenousRecord, ScenarioConfig, TimeBase};
use crate::milp::{solve_milp_with_starts, MilpError, MilpProblem, MilpStatus, Sense, SolverControls};
use crate::models::pv_available_energy;

/// `|Γ|` below this is treated as no battery command.
const GAMMA_DEADBAND: f64 = 1e-7;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MpcError {
    #[error("forecast window has {got} records, horizon is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("MPC problem reported infeasible")]
    Infeasible,
    #[error("MPC problem reported unbounded")]
    Unbounded,
    #[error(transparent)]
    Solver(#[from] MilpError),
}

/// Column indices of the window model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpcDecisionLayout {
    pub horizon: usize,
}

impl MpcDecisionLayout {
    pub const COLUMNS_PER_STEP: usize = 11;
    pub const CONTINUOUS_PER_STEP: usize = 7;
    pub const BINARIES_PER_STEP: usize = 4;

    pub fn new(horizon: usize) -> Self {
        Self { horizon }
    }

    fn at(&self, k: usize, offset: usize) -> usize {
        debug_assert!(k < self.horizon);
        k * Self::COLUMNS_PER_STEP + offset
    }

    /// `T_h(k+1)`.
    pub fn t_house_next(&self, k: usize) -> usize {
        self.at(k, 0)
    }
    /// `E_bat(k+1)`.
    pub fn e_bat_next(&self, k: usize) -> usize {
        self.at(k, 1)
    }
    pub fn gamma(&self, k: usize) -> usize {
        self.at(k, 2)
    }
    pub fn e_load(&self, k: usize) -> usize {
        self.at(k, 3)
    }
    pub fn e_pv(&self, k: usize) -> usize {
        self.at(k, 4)
    }
    pub fn zeta_h(&self, k: usize) -> usize {
        self.at(k, 5)
    }
    pub fn zeta_l(&self, k: usize) -> usize {
        self.at(k, 6)
    }
    pub fn u_ac(&self, k: usize) -> usize {
        self.at(k, 7)
    }
    pub fn f_on(&self, k: usize) -> usize {
        self.at(k, 8)
    }
    pub fn f_off(&self, k: usize) -> usize {
        self.at(k, 9)
    }
    pub fn theta(&self, k: usize) -> usize {
        self.at(k, 10)
    }

    pub fn num_columns(&self) -> usize {
        self.horizon * Self::COLUMNS_PER_STEP
    }

    pub fn num_binaries(&self) -> usize {
        self.horizon * Self::BINARIES_PER_STEP
    }

    pub fn num_continuous(&self) -> usize {
        self.horizon * Self::CONTINUOUS_PER_STEP
    }
}

/// Forecast of the next `N` records, starting with the current step.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastWindow {
    pub records: Vec<ExogenousRecord>,
}

/// Assemble the window model for the measured state.
pub fn build_milp(
    t_house_c: f64,
    e_bat_kwh: f64,
    ac_prev: bool,
    fw: &ForecastWindow,
    cfg: &ScenarioConfig,
    dp: &DerivedParams,
    tb: &TimeBase,
) -> Result<(MilpProblem, MpcDecisionLayout), MpcError> {
    let n = tb.horizon_steps;
    if fw.records.len() != n {
        return Err(MpcError::DimensionMismatch { expected: n, got: fw.records.len() });
    }
    let lay = MpcDecisionLayout::new(n);
    let th = &cfg.thermal;
    let lam = &cfg.lambdas;
    let inf = f64::INFINITY;

    let mut p = MilpProblem::new();
    // AC-off trajectory: the warmest reachable path, used to relax the lower
    // temperature bound so the model stays feasible from any state.
    let mut t_free = t_house_c;
    for (k, rec) in fw.records.iter().enumerate() {
        let w = (n - k) as f64;
        t_free = th.a_coef * t_free + th.d_coef * rec.t_ambient_c;
        let e_pv_bar = pv_available_energy(rec, cfg.alpha_pv, cfg.pv_base_kw, &cfg.pv, tb);
        let e_l_bar = rec.total_demand_kwh();
        let e_cri = rec.critical_demand_kwh().min(e_l_bar);
        // E_bat(k+1) is rewarded as E_bat at window step k+1; the last state has no term.
        let storage_cost = if k + 1 < n { -lam.storage } else { 0.0 };
        let zeta_h_lo = if k == 0 { (t_house_c - cfg.t_upper_c).max(0.0) } else { 0.0 };

        p.add_column(cfg.t_lower_c.min(t_free), inf, 0.0);
        p.add_column(dp.e_bat_floor_kwh, dp.e_bat_cap_kwh, storage_cost);
        p.add_column(cfg.gamma_lower, cfg.gamma_upper, 0.0);
        p.add_column(0.0, e_l_bar, -lam.load * w);
        p.add_column(0.0, e_pv_bar, 0.0);
        p.add_column(zeta_h_lo, inf, lam.comfort * w);
        p.add_column(0.0, e_cri, lam.critical * w);
        p.add_binary(0.0);
        p.add_binary(0.0);
        p.add_binary(0.0);
        p.add_binary(lam.discharge);
        if dp.p_ac_startup_kw > dp.p_bat_surge_kw + e_pv_bar / tb.step_hours {
            // Not even a full surge can start the AC here.
            p.upper[lay.f_on(k)] = 0.0;
        }
    }
    debug_assert_eq!(p.num_cols(), lay.num_columns());

    for (k, rec) in fw.records.iter().enumerate() {
        let e_pv_bar = p.upper[lay.e_pv(k)];
        let e_cri = p.upper[lay.zeta_l(k)];

        let mut thermal = vec![(lay.t_house_next(k), 1.0), (lay.u_ac(k), -th.b_coef * th.q_ac)];
        let mut thermal_rhs = th.d_coef * rec.t_ambient_c;
        let mut battery = vec![(lay.e_bat_next(k), 1.0), (lay.gamma(k), dp.e_bat_rate_kwh)];
        let mut battery_rhs = 0.0;
        let mut ac = vec![(lay.u_ac(k), 1.0), (lay.f_on(k), -1.0), (lay.f_off(k), 1.0)];
        let mut ac_rhs = 0.0;
        if k == 0 {
            thermal_rhs += th.a_coef * t_house_c;
            battery_rhs = e_bat_kwh;
            ac_rhs = if ac_prev { 1.0 } else { 0.0 };
        } else {
            thermal.push((lay.t_house_next(k - 1), -th.a_coef));
            battery.push((lay.e_bat_next(k - 1), -1.0));
            ac.push((lay.u_ac(k - 1), -1.0));
        }
        p.add_row(thermal, Sense::Eq, thermal_rhs);
        p.add_row(battery, Sense::Eq, battery_rhs);
        p.add_row(
            vec![
                (lay.u_ac(k), dp.e_ac_kwh),
                (lay.gamma(k), -dp.e_bat_rate_kwh),
                (lay.e_load(k), 1.0),
                (lay.e_pv(k), -1.0),
            ],
            Sense::Eq,
            0.0,
        );
        p.add_row(ac, Sense::Eq, ac_rhs);
        p.add_row(vec![(lay.f_on(k), 1.0), (lay.f_off(k), 1.0)], Sense::Le, 1.0);
        p.add_row(
            vec![(lay.f_on(k), dp.p_ac_startup_kw), (lay.theta(k), -dp.p_bat_surge_kw)],
            Sense::Le,
            e_pv_bar / tb.step_hours,
        );
        p.add_row(vec![(lay.theta(k), 1.0), (lay.gamma(k), -1.0)], Sense::Ge, 0.0);
        p.add_row(vec![(lay.e_load(k), 1.0), (lay.zeta_l(k), 1.0)], Sense::Ge, e_cri);
        if k > 0 {
            p.add_row(vec![(lay.t_house_next(k - 1), 1.0), (lay.zeta_h(k), -1.0)], Sense::Le, cfg.t_upper_c);
        }
    }
    Ok((p, lay))
}

/// First-step values of the solved plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcFirstStep {
    pub gamma: f64,
    pub u_ac: bool,
    pub e_load_kwh: f64,
    pub f_on: bool,
    pub theta: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcDiagnostics {
    pub status: Option<MilpStatus>,
    pub objective: f64,
    pub gap: f64,
    pub solve_ms: f64,
    pub nodes: usize,
    /// The solver ran out of time without an incumbent; the rule-based command was used.
    pub fallback: bool,
    pub first: Option<MpcFirstStep>,
}

/// Map the battery throughput command to (charge, discharge) bits.
pub fn gamma_to_bits(gamma: f64) -> (bool, bool) {
    (gamma < -GAMMA_DEADBAND, gamma > GAMMA_DEADBAND)
}

/// Binary part of a start for the next window: `plan` moved one step
/// earlier, with the last step repeated and the switching columns recomputed.
///
/// Startups that the model rules out are dropped and every startup gets
/// battery support.
pub fn shift_plan(plan: &[f64], ac_prev: bool, p: &MilpProblem, lay: &MpcDecisionLayout) -> Vec<f64> {
    let n = lay.horizon;
    let mut x = vec![0.0; lay.num_columns()];
    let src = MpcDecisionLayout::new(plan.len() / MpcDecisionLayout::COLUMNS_PER_STEP);
    let mut prev = ac_prev;
    for k in 0..n {
        let j = (k + 1).min(src.horizon.saturating_sub(1));
        let mut on = src.horizon > 0 && plan[src.u_ac(j)] > 0.5;
        if on && !prev && p.upper[lay.f_on(k)] < 0.5 {
            on = false;
        }
        let start = on && !prev;
        x[lay.u_ac(k)] = f64::from(u8::from(on));
        x[lay.f_on(k)] = f64::from(u8::from(start));
        x[lay.f_off(k)] = f64::from(u8::from(prev && !on));
        let theta = src.horizon > 0 && plan[src.theta(j)] > 0.5;
        x[lay.theta(k)] = f64::from(u8::from(theta || start));
        prev = on;
    }
    x
}

/// Binary part of a start with the AC off and the battery free to discharge.
pub fn ac_off_plan(ac_prev: bool, lay: &MpcDecisionLayout) -> Vec<f64> {
    let mut x = vec![0.0; lay.num_columns()];
    x[lay.f_off(0)] = f64::from(u8::from(ac_prev));
    for k in 0..lay.horizon {
        x[lay.theta(k)] = 1.0;
    }
    x
}

/// Result of one MPC step.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcOutput {
    pub command: ControlCommand,
    pub diag: MpcDiagnostics,
    /// Full column vector of the plan, kept to seed the next step.
    pub plan: Option<Vec<f64>>,
}

/// Plan over the window and return the first command.
///
/// `thermostat_prev` is only used by the rule-based fallback. `prev_plan`, the
/// plan from the step before, seeds the solver.
#[allow(clippy::too_many_arguments)]
pub fn mpc_step(
    t_house_c: f64,
    e_bat_kwh: f64,
    ac_prev: bool,
    thermostat_prev: bool,
    fw: &ForecastWindow,
    prev_plan: Option<&[f64]>,
    cfg: &ScenarioConfig,
    dp: &DerivedParams,
    tb: &TimeBase,
) -> Result<MpcOutput, MpcError> {
    let (p, lay) = build_milp(t_house_c, e_bat_kwh, ac_prev, fw, cfg, dp, tb)?;
    let node_limit = (cfg.node_limit > 0).then_some(cfg.node_limit);
    let controls = SolverControls::new(cfg.mip_gap, cfg.time_limit_s).with_node_limit(node_limit);
    let mut starts = Vec::with_capacity(2);
    if let Some(plan) = prev_plan {
        starts.push(shift_plan(plan, ac_prev, &p, &lay));
    }
    starts.push(ac_off_plan(ac_prev, &lay));
    let sol = match solve_milp_with_starts(&p, &controls, &starts) {
        Ok(sol) => sol,
        Err(MilpError::NoIncumbentAtTimeout { nodes, wall_time_s }) => {
            log::warn!("MPC solve hit its limit without an incumbent; using the rule-based command");
            let (command, _, _) =
                rulebased_step(t_house_c, e_bat_kwh, thermostat_prev, ac_prev, &fw.records[0], cfg, dp, tb);
            let diag = MpcDiagnostics {
                status: Some(MilpStatus::TimeLimit),
                objective: f64::NAN,
                gap: f64::INFINITY,
                solve_ms: wall_time_s * 1e3,
                nodes,
                fallback: true,
                first: None,
            };
            return Ok(MpcOutput { command, diag, plan: None });
        }
        Err(e) => return Err(e.into()),
    };
    match sol.status {
        MilpStatus::Infeasible => return Err(MpcError::Infeasible),
        MilpStatus::Unbounded => return Err(MpcError::Unbounded),
        MilpStatus::Optimal | MilpStatus::TimeLimit | MilpStatus::NodeLimit => {}
    }
    let x = &sol.columns;
    let first = MpcFirstStep {
        gamma: x[lay.gamma(0)],
        u_ac: x[lay.u_ac(0)] > 0.5,
        e_load_kwh: x[lay.e_load(0)].max(0.0),
        f_on: x[lay.f_on(0)] > 0.5,
        theta: x[lay.theta(0)] > 0.5,
    };
    let (charge, discharge) = gamma_to_bits(first.gamma);
    let command = ControlCommand {
        charge,
        discharge,
        ac_on: first.u_ac,
        circuits_on: priority_stack(first.e_load_kwh, &fw.records[0].circuit_demand_kwh),
    };
    let diag = MpcDiagnostics {
        status: Some(sol.status),
        objective: sol.objective,
        gap: sol.gap,
        solve_ms: sol.wall_time_s * 1e3,
        nodes: sol.nodes,
        fallback: false,
        first: Some(first),
    };
    Ok(MpcOutput { command, diag, plan: Some(sol.columns) })
}
