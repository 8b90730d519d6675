use std::ffi::{CStr, CString};
use std::ptr;

use hems_core::controller::ControllerKind;
use hems_core::data_io::synth_scenario;
use hems_core::domain::ScenarioConfig;
use hems_core::sim::simulate;
use hems_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hems_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn config_keys_and_errors() {
    let cfg = hems_config_new();
    let key = CString::new("alpha_pv").unwrap();
    unsafe {
        assert_eq!(hems_config_set(cfg, key.as_ptr(), CString::new("0.5").unwrap().as_ptr()), HemsStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(hems_config_set(cfg, key.as_ptr(), CString::new("-1").unwrap().as_ptr()), HemsStatus::Config);
        assert!(last_error().contains("alpha_pv"));
        let bogus = CString::new("colour").unwrap();
        assert_eq!(hems_config_set(cfg, bogus.as_ptr(), CString::new("1").unwrap().as_ptr()), HemsStatus::Config);
        assert_eq!(hems_config_set(cfg, ptr::null(), key.as_ptr()), HemsStatus::NullPointer);
        assert_eq!(hems_config_set(ptr::null_mut(), key.as_ptr(), key.as_ptr()), HemsStatus::NullPointer);
        hems_config_free(cfg);
        hems_config_free(ptr::null_mut());
    }
}

#[test]
fn synthetic_run_matches_the_library() {
    let cfg = hems_config_new();
    let mut run = ptr::null_mut();
    let mut m = HemsMetrics::default();
    unsafe {
        assert_eq!(hems_run_synthetic(cfg, HemsController::RuleBased as i32, 3, 1, &mut run), HemsStatus::Ok);
        assert_eq!(hems_run_len(run), 144);
        assert_eq!(hems_run_metrics(run, &mut m), HemsStatus::Ok);
        let mut t = vec![0.0; 144];
        assert_eq!(hems_run_states(run, t.as_mut_ptr(), ptr::null_mut(), 144), HemsStatus::Ok);
        assert_eq!(hems_run_states(run, t.as_mut_ptr(), ptr::null_mut(), 145), HemsStatus::InvalidArgument);

        let c = ScenarioConfig::default();
        let r = simulate(ControllerKind::RuleBased, &c, &synth_scenario(3, 1, 8, c.step_hours).records).unwrap();
        assert_eq!(Some(m.lrm_o), r.metrics.lrm_o);
        assert_eq!(m.trm_h, r.metrics.trm_h);
        assert!(m.mean_solve_ms.is_nan());
        assert_eq!(t[143], r.trajectory.steps[143].state().t_house_c);

        hems_run_free(run);
        assert_eq!(hems_run_synthetic(cfg, 9, 3, 1, &mut run), HemsStatus::InvalidArgument);
        assert!(run.is_null());
        assert_eq!(hems_run_synthetic(cfg, 0, 3, 0, &mut run), HemsStatus::InvalidArgument);
        assert_eq!(hems_run_metrics(ptr::null(), &mut m), HemsStatus::NullPointer);
        hems_config_free(cfg);
    }
}

#[test]
fn small_milp_round_trip() {
    let p = hems_milp_new();
    let mut x = 0usize;
    let mut y = 0usize;
    let mut r = HemsMilpResult { status: HemsMilpStatus::Infeasible, objective: 0.0, bound: 0.0, gap: 0.0, nodes: 0, wall_time_s: 0.0 };
    let mut cols = [0.0; 2];
    unsafe {
        // max 3x + 2y, x binary, y in [0, 1.5], x + y <= 2
        assert_eq!(hems_milp_add_column(p, 0.0, 1.0, -3.0, true, &mut x), HemsStatus::Ok);
        assert_eq!(hems_milp_add_column(p, 0.0, 1.5, -2.0, false, &mut y), HemsStatus::Ok);
        let idx = [x, y];
        let a = [1.0, 1.0];
        assert_eq!(hems_milp_add_row(p, idx.as_ptr(), a.as_ptr(), 2, HemsSense::Le as i32, 2.0), HemsStatus::Ok);
        assert_eq!(hems_milp_add_row(p, [7usize].as_ptr(), a.as_ptr(), 1, 0, 2.0), HemsStatus::InvalidArgument);
        assert_eq!(hems_milp_add_row(p, idx.as_ptr(), a.as_ptr(), 2, 5, 2.0), HemsStatus::InvalidArgument);
        assert_eq!(hems_milp_solve(p, 0.0, 10.0, 0, &mut r, cols.as_mut_ptr(), 2), HemsStatus::Ok);
        assert_eq!(r.status, HemsMilpStatus::Optimal);
        assert!((r.objective + 5.0).abs() < 1e-9);
        assert_eq!(cols, [1.0, 1.0]);
        assert_eq!(hems_milp_solve(p, 0.0, 10.0, 0, &mut r, cols.as_mut_ptr(), 3), HemsStatus::InvalidArgument);
        hems_milp_free(p);

        // Fractional root, no time to round it.
        let q = hems_milp_new();
        hems_milp_add_column(q, 0.0, 1.0, -1.0, true, ptr::null_mut());
        hems_milp_add_column(q, 0.0, 1.0, -1.0, true, ptr::null_mut());
        assert_eq!(hems_milp_add_row(q, [0usize, 1].as_ptr(), a.as_ptr(), 2, HemsSense::Le as i32, 1.5), HemsStatus::Ok);
        assert_eq!(hems_milp_solve(q, 0.0, 0.0, 0, &mut r, ptr::null_mut(), 0), HemsStatus::NoIncumbent);
        assert!(last_error().contains("without an incumbent"));
        hems_milp_free(q);
    }
}

#[test]
fn priority_stack_and_thermostat() {
    let d = [0.2, 0.2, 0.2, 0.2];
    let mut bits = [9u8; 4];
    unsafe {
        assert_eq!(hems_priority_stack(0.5, d.as_ptr(), 4, bits.as_mut_ptr()), HemsStatus::Ok);
        assert_eq!(hems_priority_stack(0.5, ptr::null(), 4, bits.as_mut_ptr()), HemsStatus::NullPointer);
    }
    assert_eq!(bits, [1, 1, 0, 0]);
    assert!(hems_thermostat(25.0, false, 25.0, 23.0));
    assert!(!hems_thermostat(23.0, true, 25.0, 23.0));
    assert!(hems_thermostat(24.0, true, 25.0, 23.0));
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hems.h")).unwrap();
    for f in [
        "hems_last_error", "hems_config_new", "hems_config_free", "hems_config_set", "hems_config_desk",
        "hems_run_synthetic", "hems_run_free", "hems_run_metrics", "hems_run_len", "hems_run_states",
        "hems_milp_new", "hems_milp_free", "hems_milp_add_column", "hems_milp_add_row", "hems_milp_solve",
        "hems_priority_stack", "hems_thermostat",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from hems.h");
    }
    assert!(header.contains("typedef struct HemsRun HemsRun;"));
    assert!(header.contains("HEMS_STATUS_NO_INCUMBENT = 6"));
}
