//! The three controllers and the priority stack they share.

mod baseline;
mod mpc;
mod priority;
mod rulebased;

use std::fmt;
use std::str::FromStr;

pub use baseline::{baseline_battery, baseline_loads, baseline_step, thermostat};
pub use mpc::{
    ac_off_plan, build_milp, gamma_to_bits, mpc_step, shift_plan, ForecastWindow, MpcDecisionLayout, MpcDiagnostics, MpcError,
    MpcFirstStep, MpcOutput,
};
pub use priority::priority_stack;
pub use rulebased::{rulebased_step, MismatchReport, RuleBranch};

use crate::domain::{ControlCommand, DerivedParams, ExogenousRecord, ScenarioConfig, TimeBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllerKind {
    Baseline,
    RuleBased,
    Mpc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Baseline, ControllerKind::RuleBased, ControllerKind::Mpc];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Baseline => "baseline",
            ControllerKind::RuleBased => "rulebased",
            ControllerKind::Mpc => "mpc",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(ControllerKind::Baseline),
            "rulebased" | "rule-based" | "rule_based" => Ok(ControllerKind::RuleBased),
            "mpc" => Ok(ControllerKind::Mpc),
            other => Err(format!("unknown controller '{other}' (expected baseline, rulebased or mpc)")),
        }
    }
}

/// What a controller sees at one step.
pub struct Observation<'a> {
    pub t_house_c: f64,
    pub e_bat_kwh: f64,
    /// AC state the plant ran in the previous step.
    pub ac_was_on: bool,
    /// Record for the current step.
    pub record: &'a ExogenousRecord,
    /// Perfect forecast starting at the current step; only the MPC reads it.
    pub forecast: Option<&'a ForecastWindow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub command: ControlCommand,
    pub mpc: Option<MpcDiagnostics>,
    pub rule: Option<(MismatchReport, RuleBranch)>,
}

/// A controller with its own memory across steps.
pub struct Controller {
    kind: ControllerKind,
    /// Previous AC command issued, the thermostat's hysteresis memory.
    last_ac_cmd: bool,
    /// Last MPC plan.
    plan: Option<Vec<f64>>,
}

impl Controller {
    pub fn new(kind: ControllerKind) -> Self {
        Self { kind, last_ac_cmd: false, plan: None }
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn needs_forecast(&self) -> bool {
        self.kind == ControllerKind::Mpc
    }

    pub fn decide(
        &mut self,
        obs: &Observation<'_>,
        cfg: &ScenarioConfig,
        dp: &DerivedParams,
        tb: &TimeBase,
    ) -> Result<Decision, MpcError> {
        let decision = match self.kind {
            ControllerKind::Baseline => Decision {
                command: baseline_step(obs.t_house_c, self.last_ac_cmd, obs.record, cfg, dp, tb),
                mpc: None,
                rule: None,
            },
            ControllerKind::RuleBased => {
                let (command, report, branch) =
                    rulebased_step(obs.t_house_c, obs.e_bat_kwh, self.last_ac_cmd, obs.ac_was_on, obs.record, cfg, dp, tb);
                Decision { command, mpc: None, rule: Some((report, branch)) }
            }
            ControllerKind::Mpc => {
                let fw = obs.forecast.ok_or(MpcError::DimensionMismatch { expected: tb.horizon_steps, got: 0 })?;
                let out = mpc_step(
                    obs.t_house_c,
                    obs.e_bat_kwh,
                    obs.ac_was_on,
                    self.last_ac_cmd,
                    fw,
                    self.plan.as_deref(),
                    cfg,
                    dp,
                    tb,
                )?;
                self.plan = out.plan;
                Decision { command: out.command, mpc: Some(out.diag), rule: None }
            }
        };
        self.last_ac_cmd = decision.command.ac_on;
        Ok(decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ControllerKind::ALL {
            assert_eq!(k.name().parse::<ControllerKind>().unwrap(), k);
        }
        assert!("fuzzy".parse::<ControllerKind>().is_err());
    }
}
