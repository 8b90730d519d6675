//! The reference controller: battery logic, a hysteresis thermostat and
//! load-on-demand, each working on its own.

use crate::domain::{ControlCommand, DerivedParams, ExogenousRecord, ScenarioConfig, TimeBase};
use crate::models::pv_available_energy;

/// Charge when PV covers the demand, discharge otherwise. Exactly one bit is set.
pub fn baseline_battery(e_pv_avail_kwh: f64, e_demand_kwh: f64) -> (bool, bool) {
    let charge = e_pv_avail_kwh >= e_demand_kwh;
    (charge, !charge)
}

pub fn thermostat(t_house_c: f64, ac_prev: bool, t_upper_c: f64, t_lower_c: f64) -> bool {
    if t_house_c >= t_upper_c {
        true
    } else if t_house_c <= t_lower_c {
        false
    } else {
        ac_prev
    }
}

/// Every circuit with demand is switched on.
pub fn baseline_loads(circuit_demand_kwh: &[f64]) -> Vec<bool> {
    circuit_demand_kwh.iter().map(|e| *e > 0.0).collect()
}

/// One baseline decision. `ac_prev` is the thermostat's previous output.
pub fn baseline_step(
    t_house_c: f64,
    ac_prev: bool,
    rec: &ExogenousRecord,
    cfg: &ScenarioConfig,
    dp: &DerivedParams,
    tb: &TimeBase,
) -> ControlCommand {
    let ac_on = thermostat(t_house_c, ac_prev, cfg.t_upper_c, cfg.t_lower_c);
    let circuits_on = baseline_loads(&rec.circuit_demand_kwh);
    let e_pv = pv_available_energy(rec, cfg.alpha_pv, cfg.pv_base_kw, &cfg.pv, tb);
    let e_d = rec.total_demand_kwh() + if ac_on { dp.e_ac_kwh } else { 0.0 };
    let (charge, discharge) = baseline_battery(e_pv, e_d);
    ControlCommand { charge, discharge, ac_on, circuits_on }
}
