//! Resiliency metrics over a finished run.

use crate::controller::{MismatchReport, MpcDiagnostics, RuleBranch};
use crate::domain::{ControlCommand, ExogenousRecord, PlantState};
use crate::plant::StepOutcome;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub record: ExogenousRecord,
    pub command: ControlCommand,
    pub outcome: StepOutcome,
    pub mpc: Option<MpcDiagnostics>,
    pub rule: Option<(MismatchReport, RuleBranch)>,
}

impl TrajectoryStep {
    /// State after the step.
    pub fn state(&self) -> &PlantState {
        &self.outcome.new_state
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub initial: Option<PlantState>,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn ratio(served: f64, demanded: f64) -> Option<f64> {
    if demanded > 0.0 {
        Some(served / demanded)
    } else {
        None
    }
}

/// Fraction of critical-circuit energy served; `None` without critical demand.
pub fn lrm_cri(traj: &Trajectory) -> Option<f64> {
    let (mut served, mut demanded) = (0.0, 0.0);
    for s in &traj.steps {
        demanded += s.record.critical_demand_kwh();
        served += s.outcome.served_circuit_kwh.first().copied().unwrap_or(0.0);
    }
    ratio(served, demanded)
}

/// Fraction of all circuit energy served; `None` without demand.
pub fn lrm_o(traj: &Trajectory) -> Option<f64> {
    let (mut served, mut demanded) = (0.0, 0.0);
    for s in &traj.steps {
        demanded += s.record.total_demand_kwh();
        served += s.outcome.served_load_kwh();
    }
    ratio(served, demanded)
}

/// Mean of `max(t_upper − T_h, 0)` over the post-step house temperatures.
pub fn trm_h(traj: &Trajectory, t_upper_c: f64) -> f64 {
    trm_h_of(traj.steps.iter().map(|s| s.state().t_house_c), t_upper_c)
}

pub fn trm_h_of(temps: impl IntoIterator<Item = f64>, t_upper_c: f64) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for t in temps {
        sum += (t_upper_c - t).max(0.0);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub lrm_cri: Option<f64>,
    pub lrm_o: Option<f64>,
    pub trm_h: f64,
    pub trip_steps: usize,
    /// Mean MPC solve time; `None` for reactive controllers.
    pub mean_solve_ms: Option<f64>,
    pub fallback_steps: usize,
}

pub fn summarize(traj: &Trajectory, t_upper_c: f64) -> Metrics {
    let solves: Vec<&MpcDiagnostics> = traj.steps.iter().filter_map(|s| s.mpc.as_ref()).collect();
    let mean_solve_ms =
        if solves.is_empty() { None } else { Some(solves.iter().map(|d| d.solve_ms).sum::<f64>() / solves.len() as f64) };
    Metrics {
        lrm_cri: lrm_cri(traj),
        lrm_o: lrm_o(traj),
        trm_h: trm_h(traj, t_upper_c),
        trip_steps: traj.steps.iter().filter(|s| s.outcome.tripped).count(),
        mean_solve_ms,
        fallback_steps: solves.iter().filter(|d| d.fallback).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(demand: Vec<f64>, served: Vec<f64>, t_house: f64) -> TrajectoryStep {
        let n = demand.len();
        TrajectoryStep {
            record: ExogenousRecord { ghi_kw_m2: 0.0, t_ambient_c: 30.0, wind_m_s: 1.0, circuit_demand_kwh: demand },
            command: ControlCommand::idle(n),
            outcome: StepOutcome {
                served_circuit_kwh: served,
                ac_served: false,
                e_pv_avail_kwh: 0.0,
                e_pv_used_kwh: 0.0,
                battery_bus_kwh: 0.0,
                bat_delta_kwh: 0.0,
                curtailed_kwh: 0.0,
                tripped: false,
                new_state: PlantState { t_house_c: t_house, e_bat_kwh: 1.0, ac_was_on: false },
            },
            mpc: None,
            rule: None,
        }
    }

    fn traj(steps: Vec<TrajectoryStep>) -> Trajectory {
        Trajectory { initial: None, steps }
    }

    #[test]
    fn all_or_nothing_served() {
        let all = traj(vec![step(vec![0.1, 0.2], vec![0.1, 0.2], 25.0); 3]);
        assert_eq!(lrm_cri(&all), Some(1.0));
        assert_eq!(lrm_o(&all), Some(1.0));
        let none = traj(vec![step(vec![0.1, 0.2], vec![0.0, 0.0], 25.0); 3]);
        assert_eq!(lrm_cri(&none), Some(0.0));
        assert_eq!(lrm_o(&none), Some(0.0));
    }

    #[test]
    fn half_of_every_step_gives_one_half() {
        let t = traj(vec![step(vec![0.2, 0.2], vec![0.2, 0.0], 25.0), step(vec![0.3, 0.3], vec![0.3, 0.0], 25.0)]);
        assert!((lrm_o(&t).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_demand_is_undefined() {
        let t = traj(vec![step(vec![0.0, 0.0], vec![0.0, 0.0], 25.0)]);
        assert_eq!(lrm_cri(&t), None);
        assert_eq!(lrm_o(&t), None);
    }

    #[test]
    fn thermal_margin_cases() {
        assert_eq!(trm_h_of([25.0; 10], 25.0), 0.0);
        assert_eq!(trm_h_of([24.0; 10], 25.0), 1.0);
        let alternating = (0..10).map(|k| if k % 2 == 0 { 27.0 } else { 23.0 });
        assert_eq!(trm_h_of(alternating, 25.0), 1.0);
    }
}
