use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hems_core::data_io::{synth_scenario, write_demand_csv, write_weather_csv};
use hems_core::report::METRICS_HEADER;

fn hems(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hems")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = hems(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

/// A config with a two-step MPC window so that whole sweeps stay quick.
fn short_config(dir: &Path) -> String {
    let p = dir.join("short.toml");
    fs::write(&p, "horizon_steps = 2\n").unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn week_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ok(&["run", "--synth", "1", "--controller", "baseline", "--out", out.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("lrm_cri="));
    let traj = rows(&out.join("trajectory.csv"));
    assert_eq!(traj.len(), 1 + 1008);
    let metrics = rows(&out.join("metrics.csv"));
    assert_eq!(metrics[0], METRICS_HEADER.join(","));
    assert_eq!(metrics.len(), 2);
    for chart in ["temperature.svg", "battery.svg", "load.svg", "pv.svg"] {
        assert!(out.join(chart).exists(), "{chart} missing");
    }
}

#[test]
fn unknown_controller_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = hems(&["run", "--synth", "1", "--controller", "fuzzy", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown controller"));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(!hems(&["sweep", "--synth", "1", "--subset", "colour=red", "--out", d]).status.success());
    assert!(!hems(&["sweep", "--synth", "1", "--subset", "alpha_i=9", "--out", d]).status.success());
    assert!(!hems(&["run", "--controller", "mpc", "--out", d]).status.success());
    let missing = hems(&["run", "--controller", "baseline", "--weather", "/nope.csv", "--loads", "/nope.csv", "--out", d]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nope.csv"));
}

#[test]
fn sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let out = dir.path().join("sub");
    ok(&["sweep", "--config", &cfg, "--synth", "1", "--days", "1", "--subset", "alpha_i=4", "--out", out.to_str().unwrap()]);
    assert_eq!(rows(&out.join("metrics.csv")).len(), 1 + 48);
    for chart in ["lrm_cri.svg", "lrm_o.svg", "trm_h.svg"] {
        assert!(out.join(chart).exists());
    }
    let out = dir.path().join("one");
    ok(&["sweep", "--config", &cfg, "--synth", "1", "--days", "1", "--subset", "alpha_i=4", "--subset", "controller=mpc",
        "--subset", "alpha_pv=1", "--out", out.to_str().unwrap()]);
    assert_eq!(rows(&out.join("metrics.csv")).len(), 1 + 4);
}

#[test]
fn full_grid_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = ["sweep", "--config", &cfg, "--synth", "5", "--days", "1", "--no-timing"];
    ok(&[&base[..], &["--out", a.to_str().unwrap()]].concat());
    ok(&[&base[..], &["--parallel", "3", "--out", b.to_str().unwrap()]].concat());
    let ma = fs::read(a.join("metrics.csv")).unwrap();
    assert_eq!(ma.iter().filter(|c| **c == b'\n').count(), 1 + 288);
    assert_eq!(ma, fs::read(b.join("metrics.csv")).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let mut outputs = Vec::new();
    for name in ["x", "y"] {
        let out = dir.path().join(name);
        ok(&["run", "--config", &cfg, "--synth", "4", "--days", "1", "--controller", "mpc", "--no-timing", "--out",
            out.to_str().unwrap()]);
        outputs.push((fs::read(out.join("trajectory.csv")).unwrap(), fs::read(out.join("metrics.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn csv_input_matches_the_synthetic_series() {
    let dir = tempfile::tempdir().unwrap();
    let s = synth_scenario(8, 2, 8, 1.0 / 6.0);
    let w = dir.path().join("weather.csv");
    let l = dir.path().join("loads.csv");
    write_weather_csv(fs::File::create(&w).unwrap(), &s.weather()).unwrap();
    write_demand_csv(fs::File::create(&l).unwrap(), &s.demand()).unwrap();
    let from_csv = dir.path().join("csv");
    let from_synth = dir.path().join("synth");
    ok(&["run", "--controller", "rulebased", "--days", "2", "--weather", w.to_str().unwrap(), "--loads",
        l.to_str().unwrap(), "--no-timing", "--out", from_csv.to_str().unwrap()]);
    ok(&["run", "--controller", "rulebased", "--days", "2", "--synth", "8", "--no-timing", "--out",
        from_synth.to_str().unwrap()]);
    assert_eq!(fs::read(from_csv.join("trajectory.csv")).unwrap(), fs::read(from_synth.join("trajectory.csv")).unwrap());
}
