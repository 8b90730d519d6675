//! Baseline command repaired by energy and startup-power mismatch checks.

use super::baseline::baseline_step;
use super::priority::priority_stack;
use crate::domain::{ControlCommand, DerivedParams, ExogenousRecord, ScenarioConfig, TimeBase};
use crate::models::pv_available_energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchReport {
    pub e_mis_kwh: f64,
    pub p_mis_kw: f64,
    /// Energy the battery can deliver this step when the baseline discharges.
    pub e_bat_dispatch_kwh: f64,
    /// Headroom the battery can absorb this step when the baseline charges.
    pub e_bat_charge_kwh: f64,
    pub s_ac_on: bool,
}

/// Which repair was applied to the baseline command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleBranch {
    PassThrough,
    DropAcForPower,
    DropAcForEnergy,
    PriorityStack,
    NothingServiceable,
}

/// One rule-based decision.
///
/// `thermostat_prev` is the controller's own previous AC command; `ac_was_on`
/// is the AC state the plant actually ran last step.
pub fn rulebased_step(
    t_house_c: f64,
    e_bat_kwh: f64,
    thermostat_prev: bool,
    ac_was_on: bool,
    rec: &ExogenousRecord,
    cfg: &ScenarioConfig,
    dp: &DerivedParams,
    tb: &TimeBase,
) -> (ControlCommand, MismatchReport, RuleBranch) {
    let ub = baseline_step(t_house_c, thermostat_prev, rec, cfg, dp, tb);
    let e_pv = pv_available_energy(rec, cfg.alpha_pv, cfg.pv_base_kw, &cfg.pv, tb);
    let e_l = rec.total_demand_kwh();

    let e_bat_d = if ub.discharge { dp.e_bat_rate_kwh.min((e_bat_kwh - dp.e_bat_floor_kwh).max(0.0)) } else { 0.0 };
    let e_bat_c = if ub.charge { dp.e_bat_rate_kwh.min((dp.e_bat_cap_kwh - e_bat_kwh).max(0.0)) } else { 0.0 };
    let s_ac_on = ub.ac_on && !ac_was_on;

    let e_ac = if ub.ac_on { dp.e_ac_kwh } else { 0.0 };
    let e_a = e_pv + e_bat_d;
    let e_mis = e_a - (e_ac + e_l);
    let p_d = if s_ac_on { dp.p_ac_startup_kw } else { 0.0 };
    let p_mis = e_pv / tb.step_hours + dp.p_bat_surge_kw - p_d;

    let report = MismatchReport { e_mis_kwh: e_mis, p_mis_kw: p_mis, e_bat_dispatch_kwh: e_bat_d, e_bat_charge_kwh: e_bat_c, s_ac_on };
    let mut cmd = ub;
    let branch = if e_mis >= 0.0 {
        if p_mis >= 0.0 {
            RuleBranch::PassThrough
        } else {
            cmd.ac_on = false;
            RuleBranch::DropAcForPower
        }
    } else if -e_mis <= e_ac {
        cmd.ac_on = false;
        RuleBranch::DropAcForEnergy
    } else if -e_mis <= e_ac + e_l {
        cmd.ac_on = false;
        cmd.circuits_on = priority_stack(e_a, &rec.circuit_demand_kwh);
        RuleBranch::PriorityStack
    } else {
        cmd.ac_on = false;
        cmd.circuits_on = priority_stack(e_a.max(0.0), &rec.circuit_demand_kwh);
        RuleBranch::NothingServiceable
    };
    (cmd, report, branch)
}
