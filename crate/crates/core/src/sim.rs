//! Closed-loop runs: controller, plant and feedback, one step at a time.

use thiserror::Error;

use crate::controller::{Controller, ControllerKind, MpcError, Observation};
use crate::data_io::forecast_window;
use crate::domain::{derive, ConfigError, ExogenousRecord, ScenarioConfig};
use crate::metrics::{summarize, Metrics, Trajectory, TrajectoryStep};
use crate::plant::{plant_step, sensors};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("empty input series")]
    EmptySeries,
    #[error("record {step} has {got} circuits, configuration has {expected}")]
    CircuitCount { step: usize, expected: usize, got: usize },
    #[error("step {step}: {source}")]
    Controller { step: usize, source: MpcError },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub kind: ControllerKind,
    pub cfg: ScenarioConfig,
    pub trajectory: Trajectory,
    pub metrics: Metrics,
}

/// Run `kind` over the whole series.
pub fn simulate(kind: ControllerKind, cfg: &ScenarioConfig, records: &[ExogenousRecord]) -> Result<RunResult, SimError> {
    if records.is_empty() {
        return Err(SimError::EmptySeries);
    }
    for (step, r) in records.iter().enumerate() {
        if r.circuit_demand_kwh.len() != cfg.n_circuits {
            return Err(SimError::CircuitCount { step, expected: cfg.n_circuits, got: r.circuit_demand_kwh.len() });
        }
    }
    let tb = cfg.time_base(records.len())?;
    let dp = derive(cfg, &tb)?;
    let mut state = cfg.initial_state(&dp);
    let mut ctl = Controller::new(kind);
    let mut traj = Trajectory { initial: Some(state), steps: Vec::with_capacity(records.len()) };
    let per_day = tb.steps_per_day().max(1);

    for (step, rec) in records.iter().enumerate() {
        let fw = ctl.needs_forecast().then(|| forecast_window(records, step, tb.horizon_steps));
        let (t_house_c, e_bat_kwh) = sensors(&state);
        let obs = Observation { t_house_c, e_bat_kwh, ac_was_on: state.ac_was_on, record: rec, forecast: fw.as_ref() };
        let decision = ctl.decide(&obs, cfg, &dp, &tb).map_err(|source| SimError::Controller { step, source })?;
        let outcome = plant_step(&state, &decision.command, rec, cfg, &dp, &tb);
        state = outcome.new_state;
        traj.steps.push(TrajectoryStep {
            record: rec.clone(),
            command: decision.command,
            outcome,
            mpc: decision.mpc,
            rule: decision.rule,
        });
        if (step + 1) % per_day == 0 {
            log::debug!("{kind}: day {} done (T_h {:.2} °C, E_bat {:.2} kWh)", (step + 1) / per_day, state.t_house_c, state.e_bat_kwh);
        }
    }
    let metrics = summarize(&traj, cfg.t_upper_c);
    Ok(RunResult { kind, cfg: cfg.clone(), trajectory: traj, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::synth_scenario;

    #[test]
    fn baseline_day_has_one_step_per_record() {
        let cfg = ScenarioConfig::default();
        let s = synth_scenario(1, 1, 8, cfg.step_hours);
        let r = simulate(ControllerKind::Baseline, &cfg, &s.records).unwrap();
        assert_eq!(r.trajectory.len(), 144);
        assert!(r.metrics.mean_solve_ms.is_none());
    }

    #[test]
    fn circuit_count_is_checked() {
        let cfg = ScenarioConfig::default();
        let s = synth_scenario(1, 1, 7, cfg.step_hours);
        assert!(matches!(simulate(ControllerKind::Baseline, &cfg, &s.records), Err(SimError::CircuitCount { .. })));
    }

    #[test]
    fn mpc_runs_a_short_horizon() {
        let mut cfg = ScenarioConfig::default().with_case(4.0, 0.5, 0.5);
        cfg.horizon_steps = 6;
        let s = synth_scenario(2, 1, 8, cfg.step_hours).truncated(24);
        let r = simulate(ControllerKind::Mpc, &cfg, &s.records).unwrap();
        assert_eq!(r.trajectory.len(), 24);
        assert!(r.trajectory.steps.iter().all(|s| s.mpc.is_some()));
    }
}
