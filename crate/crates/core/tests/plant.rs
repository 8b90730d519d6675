use hems_core::domain::{derive, ControlCommand, DerivedParams, ExogenousRecord, PlantState, ScenarioConfig, TimeBase};
use hems_core::plant::{plant_step, StepOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let pick = |rng: &mut ChaCha8Rng, v: &[f64]| v[rng.random_range(0..v.len())];
    let mut cfg = ScenarioConfig::default().with_case(
        pick(rng, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
        pick(rng, &[0.25, 0.5, 0.75, 1.0]),
        pick(rng, &[0.25, 0.5, 0.75, 1.0]),
    );
    cfg.bat_floor_kwh = pick(rng, &[0.0, 0.5]);
    cfg
}

fn random_step(rng: &mut ChaCha8Rng, dp: &DerivedParams) -> (PlantState, ControlCommand, ExogenousRecord) {
    let e_bat = match rng.random_range(0..6) {
        0 => dp.e_bat_floor_kwh,
        1 => dp.e_bat_cap_kwh,
        _ => rng.random_range(dp.e_bat_floor_kwh..=dp.e_bat_cap_kwh),
    };
    let state = PlantState { t_house_c: rng.random_range(18.0..34.0), e_bat_kwh: e_bat, ac_was_on: rng.random_bool(0.5) };
    let (charge, discharge) = match rng.random_range(0..3) {
        0 => (true, false),
        1 => (false, true),
        _ => (false, false),
    };
    let cmd = ControlCommand { charge, discharge, ac_on: rng.random_bool(0.5), circuits_on: (0..8).map(|_| rng.random_bool(0.6)).collect() };
    let rec = ExogenousRecord {
        ghi_kw_m2: if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.2) },
        t_ambient_c: rng.random_range(15.0..42.0),
        wind_m_s: rng.random_range(0.0..8.0),
        circuit_demand_kwh: (0..8).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..0.4) }).collect(),
    };
    (state, cmd, rec)
}

fn check(state: &PlantState, cmd: &ControlCommand, rec: &ExogenousRecord, o: &StepOutcome, cfg: &ScenarioConfig, dp: &DerivedParams) {
    let e = o.new_state.e_bat_kwh;
    assert!(e >= dp.e_bat_floor_kwh - 1e-12 && e <= dp.e_bat_cap_kwh + 1e-12, "battery out of bounds: {e}");
    assert!((o.bat_delta_kwh - (e - state.e_bat_kwh)).abs() <= 1e-12);
    assert!(o.curtailed_kwh >= -1e-12);
    if o.tripped {
        assert!(cmd.ac_on && !state.ac_was_on, "trip without a startup");
        assert_eq!(o.served_load_kwh(), 0.0);
        assert!(!o.ac_served && !o.new_state.ac_was_on);
        assert_eq!(e, state.e_bat_kwh);
        return;
    }
    let served = o.served_load_kwh() + o.served_ac_kwh(dp);
    let residual = o.e_pv_used_kwh + o.battery_bus_kwh - served;
    assert!(residual.abs() <= 1e-9, "energy balance residual {residual}");
    assert!(o.e_pv_used_kwh <= o.e_pv_avail_kwh + 1e-12);
    assert!(o.battery_bus_kwh.abs() <= dp.e_bat_rate_kwh + 1e-12);
    if o.battery_bus_kwh > 0.0 {
        assert!(!cmd.charge);
        let removed = -o.bat_delta_kwh;
        assert!((removed * cfg.discharge_eff - o.battery_bus_kwh).abs() <= 1e-9);
    } else if o.battery_bus_kwh < 0.0 {
        assert!(cmd.charge);
        assert!((o.bat_delta_kwh - cfg.charge_eff * -o.battery_bus_kwh).abs() <= 1e-9);
    }
    // Served circuits are the commanded ones with a low-priority tail removed.
    let served_bits: Vec<bool> = o.served_circuit_kwh.iter().zip(&rec.circuit_demand_kwh).map(|(s, d)| *s == *d && *s > 0.0).collect();
    let mut cut = false;
    for i in 0..8 {
        let wanted = cmd.circuits_on[i] && rec.circuit_demand_kwh[i] > 0.0;
        if o.served_circuit_kwh[i] > 0.0 {
            assert!(cmd.circuits_on[i] && !cut, "circuit {i} served out of order");
        } else if wanted {
            cut = true;
        }
        assert!(o.served_circuit_kwh[i] == 0.0 || served_bits[i]);
    }
    if cut {
        assert!(!o.ac_served, "a circuit was shed while the AC ran");
    }
    assert_eq!(o.new_state.ac_was_on, o.ac_served);
}

#[test]
fn random_steps_conserve_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tb = TimeBase::week();
    let mut trips = 0;
    for i in 0..20_000 {
        let cfg = random_case(&mut rng);
        let dp = derive(&cfg, &tb).unwrap();
        let (state, cmd, rec) = random_step(&mut rng, &dp);
        let o = plant_step(&state, &cmd, &rec, &cfg, &dp, &tb);
        trips += usize::from(o.tripped);
        check(&state, &cmd, &rec, &o, &cfg, &dp);
        if i % 1000 == 0 {
            // Same input, same output.
            assert_eq!(o, plant_step(&state, &cmd, &rec, &cfg, &dp, &tb));
        }
    }
    assert!(trips > 0);
}

#[test]
fn idle_command_only_moves_temperature() {
    let cfg = ScenarioConfig::default();
    let tb = TimeBase::week();
    let dp = derive(&cfg, &tb).unwrap();
    let state = PlantState { t_house_c: 24.0, e_bat_kwh: 5.0, ac_was_on: false };
    let rec = ExogenousRecord { ghi_kw_m2: 0.7, t_ambient_c: 30.0, wind_m_s: 1.0, circuit_demand_kwh: vec![0.1; 8] };
    let o = plant_step(&state, &ControlCommand::idle(8), &rec, &cfg, &dp, &tb);
    assert_eq!(o.new_state.e_bat_kwh, 5.0);
    assert_eq!(o.served_load_kwh(), 0.0);
    assert!((o.curtailed_kwh - o.e_pv_avail_kwh).abs() < 1e-12);
    assert!(o.new_state.t_house_c > 24.0);
}
