//! Physical sub-models: PV available energy, house thermal step, battery energy step.

use crate::domain::{DerivedParams, ExogenousRecord, TimeBase};

/// Coefficients of the discrete house model
/// `T(k+1) = a·T(k) + b·u_ac·q_ac + d·T_am(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub a_coef: f64,
    pub b_coef: f64,
    pub d_coef: f64,
    /// AC thermal input; negative for cooling.
    pub q_ac: f64,
}

impl ThermalParams {
    /// First-order discretisation with time constant `tau_h`. A continuously
    /// running AC settles `ac_delta_c` below ambient.
    pub fn first_order(tau_h: f64, step_hours: f64, ac_delta_c: f64) -> Self {
        let a = (-step_hours / tau_h).exp();
        Self { a_coef: a, b_coef: 1.0 - a, d_coef: 1.0 - a, q_ac: -ac_delta_c }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.a_coef > 0.0 && self.a_coef < 1.0) {
            return Err(format!("thermal_a must lie in (0, 1), got {}", self.a_coef));
        }
        if (self.a_coef + self.d_coef - 1.0).abs() > 1e-9 {
            return Err(format!(
                "thermal_a + thermal_d must equal 1, got {}",
                self.a_coef + self.d_coef
            ));
        }
        if !(self.b_coef.is_finite() && self.q_ac.is_finite()) {
            return Err("thermal_b and thermal_q_ac must be finite".into());
        }
        Ok(())
    }

    /// Temperature change contributed by one step of AC operation.
    pub fn ac_gain(&self) -> f64 {
        self.b_coef * self.q_ac
    }
}

/// Faiman module-temperature coefficients and the power temperature coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvParams {
    /// Constant heat-loss coefficient, W/(m²·°C).
    pub u0: f64,
    /// Wind-dependent heat-loss coefficient, W/(m²·°C) per m/s.
    pub u1: f64,
    /// Power temperature coefficient, 1/°C.
    pub gamma_p: f64,
    pub t_ref_c: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        Self { u0: 25.0, u1: 6.84, gamma_p: -0.0035, t_ref_c: 25.0 }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.u0 > 0.0) {
            return Err("pv_u0 must be positive".into());
        }
        if !(self.u1 >= 0.0) {
            return Err("pv_u1 must be nonnegative".into());
        }
        if !(self.gamma_p < 0.0) {
            return Err("pv_gamma must be negative".into());
        }
        Ok(())
    }

    pub fn module_temperature(&self, ghi_kw_m2: f64, t_ambient_c: f64, wind_m_s: f64) -> f64 {
        t_ambient_c + ghi_kw_m2 * 1000.0 / (self.u0 + self.u1 * wind_m_s)
    }
}

/// Maximum PV energy (kWh) over one step for an array of `alpha_pv · pv_base_kw`.
///
/// Output is linear in irradiance (relative to 1 kW/m²) and derated by the
/// module temperature, then clamped to `[0, nameplate · step]`.
pub fn pv_available_energy(
    rec: &ExogenousRecord,
    alpha_pv: f64,
    pv_base_kw: f64,
    pv: &PvParams,
    tb: &TimeBase,
) -> f64 {
    let ghi = rec.ghi_kw_m2.max(0.0);
    if ghi == 0.0 {
        return 0.0;
    }
    let rated_kw = alpha_pv * pv_base_kw;
    let t_mod = pv.module_temperature(ghi, rec.t_ambient_c, rec.wind_m_s.max(0.0));
    let derate = (1.0 + pv.gamma_p * (t_mod - pv.t_ref_c)).max(0.0);
    let p_kw = (rated_kw * ghi * derate).min(rated_kw);
    p_kw * tb.step_hours
}

pub fn thermal_step(t_house_c: f64, ac_on: bool, t_ambient_c: f64, p: &ThermalParams) -> f64 {
    let u = if ac_on { 1.0 } else { 0.0 };
    p.a_coef * t_house_c + p.b_coef * u * p.q_ac + p.d_coef * t_ambient_c
}

/// Loss-free battery update used inside the MPC: positive `gamma` discharges.
pub fn battery_step_model(e_bat_kwh: f64, gamma: f64, dp: &DerivedParams) -> f64 {
    e_bat_kwh - gamma * dp.e_bat_rate_kwh
}

/// Round-trip efficiencies applied by the plant battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub charge: f64,
    pub discharge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryTransfer {
    /// Stored energy after the step.
    pub stored_kwh: f64,
    /// Energy that actually crossed the bus, always nonnegative.
    pub bus_kwh: f64,
}

/// Battery update applied by the plant.
///
/// Charging stores `η_c · energy`; discharging delivers `energy` to the bus and
/// removes `energy / η_d` from storage. The result is clamped to
/// `[floor, cap]` and the bus energy is reduced to what was actually moved.
pub fn battery_step_plant(
    e_bat_kwh: f64,
    charge: bool,
    discharge: bool,
    energy_through_kwh: f64,
    eff: Efficiency,
    dp: &DerivedParams,
) -> BatteryTransfer {
    debug_assert!(!(charge && discharge));
    let energy = energy_through_kwh.max(0.0);
    let (floor, cap) = (dp.e_bat_floor_kwh, dp.e_bat_cap_kwh);
    if charge && energy > 0.0 {
        let room = (cap - e_bat_kwh).max(0.0);
        let stored = eff.charge * energy;
        if stored <= room {
            BatteryTransfer { stored_kwh: e_bat_kwh + stored, bus_kwh: energy }
        } else {
            BatteryTransfer { stored_kwh: cap, bus_kwh: room / eff.charge }
        }
    } else if discharge && energy > 0.0 {
        let avail = (e_bat_kwh - floor).max(0.0);
        let removed = energy / eff.discharge;
        if removed <= avail {
            BatteryTransfer { stored_kwh: e_bat_kwh - removed, bus_kwh: energy }
        } else {
            BatteryTransfer { stored_kwh: floor.max(e_bat_kwh.min(floor)), bus_kwh: avail * eff.discharge }
        }
    } else {
        BatteryTransfer { stored_kwh: e_bat_kwh, bus_kwh: 0.0 }
    }
}

/// Largest energy the battery can put on the bus in one step.
pub fn deliverable_kwh(e_bat_kwh: f64, eff: Efficiency, dp: &DerivedParams) -> f64 {
    ((e_bat_kwh - dp.e_bat_floor_kwh).max(0.0) * eff.discharge).min(dp.e_bat_rate_kwh)
}

/// Largest energy the battery can take from the bus in one step.
pub fn absorbable_kwh(e_bat_kwh: f64, eff: Efficiency, dp: &DerivedParams) -> f64 {
    ((dp.e_bat_cap_kwh - e_bat_kwh).max(0.0) / eff.charge).min(dp.e_bat_rate_kwh)
}
