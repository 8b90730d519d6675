//! Closed-loop truth model of the house.
//!
//! One call to [`plant_step`] applies a command and a weather/demand record to
//! the state. Infeasible commands never fail: a startup the sources cannot
//! power trips the whole house for the step, and an energy shortfall sheds the
//! AC first and then circuits from the lowest priority upward.

use crate::domain::{ControlCommand, DerivedParams, ExogenousRecord, PlantState, ScenarioConfig, TimeBase};
use crate::models::{
    absorbable_kwh, battery_step_plant, deliverable_kwh, pv_available_energy, thermal_step, Efficiency,
};

const ENERGY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Energy served per circuit; each entry is 0 or the full demand.
    pub served_circuit_kwh: Vec<f64>,
    pub ac_served: bool,
    pub e_pv_avail_kwh: f64,
    /// PV energy used for loads and charging.
    pub e_pv_used_kwh: f64,
    /// Net energy the battery put on the bus; negative while charging.
    pub battery_bus_kwh: f64,
    /// Change of stored battery energy.
    pub bat_delta_kwh: f64,
    pub curtailed_kwh: f64,
    pub tripped: bool,
    pub new_state: PlantState,
}

impl StepOutcome {
    pub fn served_ac_kwh(&self, dp: &DerivedParams) -> f64 {
        if self.ac_served {
            dp.e_ac_kwh
        } else {
            0.0
        }
    }

    pub fn served_load_kwh(&self) -> f64 {
        self.served_circuit_kwh.iter().sum()
    }
}

/// Power available for an AC startup transient.
///
/// The battery contributes its surge rating whenever it holds energy above the
/// floor, independent of the net charge/discharge command for the step.
pub fn startup_power_available_kw(e_pv_avail_kwh: f64, state: &PlantState, dp: &DerivedParams, tb: &TimeBase) -> f64 {
    let surge = if state.e_bat_kwh > dp.e_bat_floor_kwh + ENERGY_EPS { dp.p_bat_surge_kw } else { 0.0 };
    e_pv_avail_kwh / tb.step_hours + surge
}

pub fn plant_step(
    state: &PlantState,
    cmd: &ControlCommand,
    rec: &ExogenousRecord,
    cfg: &ScenarioConfig,
    dp: &DerivedParams,
    tb: &TimeBase,
) -> StepOutcome {
    debug_assert!(cmd.is_valid(), "charge and discharge both set");
    let n = rec.circuit_demand_kwh.len();
    let eff = Efficiency { charge: cfg.charge_eff, discharge: cfg.discharge_eff };
    let e_pv = pv_available_energy(rec, cfg.alpha_pv, cfg.pv_base_kw, &cfg.pv, tb);

    let startup = cmd.ac_on && !state.ac_was_on;
    if startup && dp.p_ac_startup_kw > startup_power_available_kw(e_pv, state, dp, tb) {
        return StepOutcome {
            served_circuit_kwh: vec![0.0; n],
            ac_served: false,
            e_pv_avail_kwh: e_pv,
            e_pv_used_kwh: 0.0,
            battery_bus_kwh: 0.0,
            bat_delta_kwh: 0.0,
            curtailed_kwh: e_pv,
            tripped: true,
            new_state: PlantState {
                t_house_c: thermal_step(state.t_house_c, false, rec.t_ambient_c, &cfg.thermal),
                e_bat_kwh: state.e_bat_kwh,
                ac_was_on: false,
            },
        };
    }

    let discharge = cmd.discharge && !cmd.charge;
    let charge = cmd.charge && !cmd.discharge;
    let supply = e_pv + if discharge { deliverable_kwh(state.e_bat_kwh, eff, dp) } else { 0.0 };

    let mut ac = cmd.ac_on;
    let mut on: Vec<bool> = (0..n).map(|i| cmd.circuits_on.get(i).copied().unwrap_or(false)).collect();
    let demand = |ac: bool, on: &[bool]| -> f64 {
        let loads: f64 = on.iter().zip(&rec.circuit_demand_kwh).filter(|(u, _)| **u).map(|(_, e)| *e).sum();
        if ac {
            dp.e_ac_kwh + loads
        } else {
            loads
        }
    };
    if demand(ac, &on) > supply + ENERGY_EPS {
        ac = false;
        for i in (0..n).rev() {
            if demand(ac, &on) <= supply + ENERGY_EPS {
                break;
            }
            on[i] = false;
        }
    }

    let served_circuit_kwh: Vec<f64> =
        on.iter().zip(&rec.circuit_demand_kwh).map(|(u, e)| if *u { *e } else { 0.0 }).collect();
    let served = demand(ac, &on);

    let pv_to_load = e_pv.min(served);
    let deficit = served - pv_to_load;
    let mut e_bat = state.e_bat_kwh;
    let mut battery_bus = 0.0;
    let mut pv_used = pv_to_load;
    if deficit > 0.0 {
        let t = battery_step_plant(e_bat, false, true, deficit, eff, dp);
        e_bat = t.stored_kwh;
        battery_bus = t.bus_kwh;
    } else if charge {
        let surplus = e_pv - pv_to_load;
        let absorb = surplus.min(absorbable_kwh(e_bat, eff, dp));
        let t = battery_step_plant(e_bat, true, false, absorb, eff, dp);
        e_bat = t.stored_kwh;
        battery_bus = -t.bus_kwh;
        pv_used += t.bus_kwh;
    }

    StepOutcome {
        served_circuit_kwh,
        ac_served: ac,
        e_pv_avail_kwh: e_pv,
        e_pv_used_kwh: pv_used,
        battery_bus_kwh: battery_bus,
        bat_delta_kwh: e_bat - state.e_bat_kwh,
        curtailed_kwh: (e_pv - pv_used).max(0.0),
        tripped: false,
        new_state: PlantState {
            t_house_c: thermal_step(state.t_house_c, ac, rec.t_ambient_c, &cfg.thermal),
            e_bat_kwh: e_bat,
            ac_was_on: ac,
        },
    }
}

/// What the two house sensors report.
pub fn sensors(state: &PlantState) -> (f64, f64) {
    (state.t_house_c, state.e_bat_kwh)
}
