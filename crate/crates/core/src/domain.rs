//! Shared value types: time base, scenario configuration and the derived
//! physical parameters, exogenous records, commands and plant state.
//!
//! Units are fixed throughout the crate: kW for power, kWh for energy per
//! step, °C for temperature, hours for durations.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::models::{PvParams, ThermalParams};

/// The PV size factor grid.
pub const ALPHA_PV_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
/// The battery size factor grid.
pub const ALPHA_BAT_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
/// The AC startup (locked-rotor) current factor grid.
pub const ALPHA_I_GRID: [f64; 6] = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Discrete time base of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBase {
    pub step_hours: f64,
    pub steps_total: usize,
    pub horizon_steps: usize,
}

impl TimeBase {
    pub fn new(step_hours: f64, steps_total: usize, horizon_steps: usize) -> Result<Self, ConfigError> {
        if !(step_hours > 0.0 && step_hours.is_finite()) {
            return Err(invalid(format!("step_hours must be positive, got {step_hours}")));
        }
        if steps_total == 0 {
            return Err(invalid("steps_total must be at least 1"));
        }
        if horizon_steps == 0 {
            return Err(invalid("horizon_steps must be at least 1"));
        }
        Ok(Self { step_hours, steps_total, horizon_steps })
    }

    /// Ten-minute steps, one week, 24-hour horizon.
    pub fn week() -> Self {
        Self { step_hours: 1.0 / 6.0, steps_total: 7 * 24 * 6, horizon_steps: 144 }
    }

    pub fn steps_per_day(&self) -> usize {
        (24.0 / self.step_hours).round() as usize
    }
}

/// Weights of the five MPC objective terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambdas {
    /// Temperature slack.
    pub comfort: f64,
    /// Critical-load slack.
    pub critical: f64,
    /// Served other-load energy.
    pub load: f64,
    /// Stored battery energy.
    pub storage: f64,
    /// Battery discharge indicator.
    pub discharge: f64,
}

impl Lambdas {
    pub fn uniform(w: f64) -> Self {
        Self { comfort: w, critical: w, load: w, storage: w, discharge: w }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            comfort: self.comfort * factor,
            critical: self.critical * factor,
            load: self.load * factor,
            storage: self.storage * factor,
            discharge: self.discharge * factor,
        }
    }
}

impl Default for Lambdas {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

/// Everything that defines one simulation case.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub alpha_pv: f64,
    pub alpha_bat: f64,
    pub alpha_i: f64,
    pub alpha_v: f64,
    pub pv_base_kw: f64,
    pub bat_capacity_base_kwh: f64,
    pub bat_rate_base_kw: f64,
    pub bat_surge_base_kw: f64,
    pub bat_floor_kwh: f64,
    pub ac_rated_kw: f64,
    pub t_upper_c: f64,
    pub t_lower_c: f64,
    pub lambdas: Lambdas,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub mip_gap: f64,
    pub time_limit_s: f64,
    /// Branch-and-bound node cap per MPC solve; 0 means none.
    pub node_limit: usize,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    /// Time constant behind the default thermal coefficients.
    pub thermal_tau_h: f64,
    /// Steady-state pull-down of a continuously running AC below ambient.
    pub thermal_ac_delta_c: f64,
    pub thermal: ThermalParams,
    pub pv: PvParams,
    pub n_circuits: usize,
    pub step_hours: f64,
    pub horizon_steps: usize,
    pub initial_t_house_c: f64,
    /// Initial battery energy as a fraction of capacity.
    pub initial_soc: f64,
}

pub const DESK_HORIZON_STEPS: usize = 36;
pub const DESK_NODE_LIMIT: usize = 50;

impl Default for ScenarioConfig {
    fn default() -> Self {
        let step_hours = 1.0 / 6.0;
        Self {
            alpha_pv: 1.0,
            alpha_bat: 1.0,
            alpha_i: 4.0,
            alpha_v: 0.3,
            pv_base_kw: 10.075,
            bat_capacity_base_kwh: 13.5,
            bat_rate_base_kw: 5.0,
            bat_surge_base_kw: 7.0,
            bat_floor_kwh: 0.0,
            ac_rated_kw: 3.0,
            t_upper_c: 25.0,
            t_lower_c: 23.0,
            lambdas: Lambdas::default(),
            gamma_lower: -1.0,
            gamma_upper: 1.0,
            mip_gap: 0.01,
            time_limit_s: 500.0,
            node_limit: 0,
            charge_eff: 0.95,
            discharge_eff: 0.95,
            thermal_tau_h: 2.0,
            thermal_ac_delta_c: 10.0,
            thermal: ThermalParams::first_order(2.0, step_hours, 10.0),
            pv: PvParams::default(),
            n_circuits: 8,
            step_hours,
            horizon_steps: 144,
            initial_t_house_c: 24.0,
            initial_soc: 1.0,
        }
    }
}

/// Parameters computed from a [`ScenarioConfig`] and a [`TimeBase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub pv_rated_kw: f64,
    pub e_pv_rated_kwh: f64,
    pub e_ac_kwh: f64,
    pub p_ac_startup_kw: f64,
    pub e_bat_cap_kwh: f64,
    pub e_bat_floor_kwh: f64,
    pub e_bat_rate_kwh: f64,
    pub p_bat_rate_kw: f64,
    pub p_bat_surge_kw: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("alpha_pv", self.alpha_pv),
            ("alpha_bat", self.alpha_bat),
            ("alpha_i", self.alpha_i),
            ("pv_base_kw", self.pv_base_kw),
            ("bat_capacity_base_kwh", self.bat_capacity_base_kwh),
            ("bat_rate_base_kw", self.bat_rate_base_kw),
            ("bat_surge_base_kw", self.bat_surge_base_kw),
            ("ac_rated_kw", self.ac_rated_kw),
            ("step_hours", self.step_hours),
            ("time_limit_s", self.time_limit_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be strictly positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.alpha_v) {
            return Err(invalid(format!("alpha_v must lie in [0, 1), got {}", self.alpha_v)));
        }
        for (name, v) in [("charge_eff", self.charge_eff), ("discharge_eff", self.discharge_eff)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(self.t_lower_c < self.t_upper_c) {
            return Err(invalid(format!(
                "t_lower_c ({}) must be below t_upper_c ({})",
                self.t_lower_c, self.t_upper_c
            )));
        }
        if !(self.gamma_lower < self.gamma_upper) {
            return Err(invalid("gamma_lower must be below gamma_upper"));
        }
        if !(self.mip_gap >= 0.0) {
            return Err(invalid("mip_gap must be nonnegative"));
        }
        let l = &self.lambdas;
        for w in [l.comfort, l.critical, l.load, l.storage, l.discharge] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid("lambda weights must be finite and nonnegative"));
            }
        }
        if self.n_circuits == 0 {
            return Err(invalid("n_circuits must be at least 1"));
        }
        if self.horizon_steps == 0 {
            return Err(invalid("horizon_steps must be at least 1"));
        }
        let cap = self.alpha_bat * self.bat_capacity_base_kwh;
        if !(self.bat_floor_kwh >= 0.0 && self.bat_floor_kwh < cap) {
            return Err(invalid("bat_floor_kwh must lie in [0, capacity)"));
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(invalid("initial_soc must lie in [0, 1]"));
        }
        self.thermal.validate().map_err(invalid)?;
        self.pv.validate().map_err(invalid)?;
        Ok(())
    }

    pub fn time_base(&self, steps_total: usize) -> Result<TimeBase, ConfigError> {
        TimeBase::new(self.step_hours, steps_total, self.horizon_steps)
    }

    /// Desk-scale MPC settings: a 6-hour window and a node cap per solve.
    pub fn desk(&self) -> Self {
        Self { horizon_steps: DESK_HORIZON_STEPS, node_limit: DESK_NODE_LIMIT, ..self.clone() }
    }

    /// Same case with different size factors.
    pub fn with_case(&self, alpha_i: f64, alpha_pv: f64, alpha_bat: f64) -> Self {
        Self { alpha_i, alpha_pv, alpha_bat, ..self.clone() }
    }

    pub fn initial_state(&self, dp: &DerivedParams) -> PlantState {
        let e = dp.e_bat_floor_kwh + self.initial_soc * (dp.e_bat_cap_kwh - dp.e_bat_floor_kwh);
        PlantState { t_house_c: self.initial_t_house_c, e_bat_kwh: e, ac_was_on: false }
    }

    /// Load a flat key-value TOML file. Keys not listed are defaults; unknown keys are errors.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        file.apply(Self::default())
    }

    /// Set one key as it would appear in a config file.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let doc = format!("{key} = {value}");
        let file: ConfigFile = toml::from_str(&doc).map_err(|e| ConfigError::Parse(e.to_string()))?;
        *self = file.apply(self.clone())?;
        Ok(())
    }
}

/// Config keys; every field of [`ScenarioConfig`] has exactly one key.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    alpha_pv: Option<f64>,
    alpha_bat: Option<f64>,
    alpha_i: Option<f64>,
    alpha_v: Option<f64>,
    pv_base_kw: Option<f64>,
    bat_capacity_base_kwh: Option<f64>,
    bat_rate_base_kw: Option<f64>,
    bat_surge_base_kw: Option<f64>,
    bat_floor_kwh: Option<f64>,
    ac_rated_kw: Option<f64>,
    t_upper_c: Option<f64>,
    t_lower_c: Option<f64>,
    lambda_comfort: Option<f64>,
    lambda_critical: Option<f64>,
    lambda_load: Option<f64>,
    lambda_storage: Option<f64>,
    lambda_discharge: Option<f64>,
    gamma_lower: Option<f64>,
    gamma_upper: Option<f64>,
    mip_gap: Option<f64>,
    time_limit_s: Option<f64>,
    node_limit: Option<usize>,
    charge_eff: Option<f64>,
    discharge_eff: Option<f64>,
    thermal_tau_h: Option<f64>,
    thermal_ac_delta_c: Option<f64>,
    thermal_a: Option<f64>,
    thermal_b: Option<f64>,
    thermal_d: Option<f64>,
    thermal_q_ac: Option<f64>,
    pv_u0: Option<f64>,
    pv_u1: Option<f64>,
    pv_gamma: Option<f64>,
    pv_t_ref_c: Option<f64>,
    n_circuits: Option<usize>,
    step_hours: Option<f64>,
    horizon_steps: Option<usize>,
    initial_t_house_c: Option<f64>,
    initial_soc: Option<f64>,
}

impl ConfigFile {
    fn apply(self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            alpha_pv => cfg.alpha_pv,
            alpha_bat => cfg.alpha_bat,
            alpha_i => cfg.alpha_i,
            alpha_v => cfg.alpha_v,
            pv_base_kw => cfg.pv_base_kw,
            bat_capacity_base_kwh => cfg.bat_capacity_base_kwh,
            bat_rate_base_kw => cfg.bat_rate_base_kw,
            bat_surge_base_kw => cfg.bat_surge_base_kw,
            bat_floor_kwh => cfg.bat_floor_kwh,
            ac_rated_kw => cfg.ac_rated_kw,
            t_upper_c => cfg.t_upper_c,
            t_lower_c => cfg.t_lower_c,
            lambda_comfort => cfg.lambdas.comfort,
            lambda_critical => cfg.lambdas.critical,
            lambda_load => cfg.lambdas.load,
            lambda_storage => cfg.lambdas.storage,
            lambda_discharge => cfg.lambdas.discharge,
            gamma_lower => cfg.gamma_lower,
            gamma_upper => cfg.gamma_upper,
            mip_gap => cfg.mip_gap,
            time_limit_s => cfg.time_limit_s,
            node_limit => cfg.node_limit,
            charge_eff => cfg.charge_eff,
            discharge_eff => cfg.discharge_eff,
            pv_u0 => cfg.pv.u0,
            pv_u1 => cfg.pv.u1,
            pv_gamma => cfg.pv.gamma_p,
            pv_t_ref_c => cfg.pv.t_ref_c,
            n_circuits => cfg.n_circuits,
            step_hours => cfg.step_hours,
            horizon_steps => cfg.horizon_steps,
            initial_t_house_c => cfg.initial_t_house_c,
            initial_soc => cfg.initial_soc,
        }
        // The first-order thermal defaults depend on the step length, so they are
        // re-derived whenever the step or the time constant changes.
        if self.step_hours.is_some() || self.thermal_tau_h.is_some() || self.thermal_ac_delta_c.is_some() {
            set! {
                thermal_tau_h => cfg.thermal_tau_h,
                thermal_ac_delta_c => cfg.thermal_ac_delta_c,
            }
            if !(cfg.thermal_tau_h > 0.0 && cfg.step_hours > 0.0) {
                return Err(invalid("thermal_tau_h and step_hours must be positive"));
            }
            cfg.thermal = ThermalParams::first_order(cfg.thermal_tau_h, cfg.step_hours, cfg.thermal_ac_delta_c);
        }
        set! {
            thermal_a => cfg.thermal.a_coef,
            thermal_b => cfg.thermal.b_coef,
            thermal_d => cfg.thermal.d_coef,
            thermal_q_ac => cfg.thermal.q_ac,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Compute the physical parameters of a case.
pub fn derive(cfg: &ScenarioConfig, tb: &TimeBase) -> Result<DerivedParams, ConfigError> {
    cfg.validate()?;
    let pv_rated_kw = cfg.alpha_pv * cfg.pv_base_kw;
    let p_bat_rate_kw = cfg.alpha_bat * cfg.bat_rate_base_kw;
    Ok(DerivedParams {
        pv_rated_kw,
        e_pv_rated_kwh: pv_rated_kw * tb.step_hours,
        e_ac_kwh: cfg.ac_rated_kw * tb.step_hours,
        p_ac_startup_kw: (1.0 - cfg.alpha_v) * cfg.alpha_i * cfg.ac_rated_kw,
        e_bat_cap_kwh: cfg.alpha_bat * cfg.bat_capacity_base_kwh,
        e_bat_floor_kwh: cfg.bat_floor_kwh,
        e_bat_rate_kwh: p_bat_rate_kw * tb.step_hours,
        p_bat_rate_kw,
        p_bat_surge_kw: cfg.alpha_bat * cfg.bat_surge_base_kw,
    })
}

/// One step of weather and per-circuit demand. Circuits are in descending
/// priority; index 0 is the critical circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousRecord {
    pub ghi_kw_m2: f64,
    pub t_ambient_c: f64,
    pub wind_m_s: f64,
    pub circuit_demand_kwh: Vec<f64>,
}

impl ExogenousRecord {
    pub fn total_demand_kwh(&self) -> f64 {
        self.circuit_demand_kwh.iter().sum()
    }

    pub fn critical_demand_kwh(&self) -> f64 {
        self.circuit_demand_kwh.first().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlCommand {
    pub charge: bool,
    pub discharge: bool,
    pub ac_on: bool,
    pub circuits_on: Vec<bool>,
}

impl ControlCommand {
    pub fn idle(n_circuits: usize) -> Self {
        Self { charge: false, discharge: false, ac_on: false, circuits_on: vec![false; n_circuits] }
    }

    pub fn is_valid(&self) -> bool {
        !(self.charge && self.discharge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub t_house_c: f64,
    pub e_bat_kwh: f64,
    pub ac_was_on: bool,
}
