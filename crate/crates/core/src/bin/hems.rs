use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hems_core::controller::ControllerKind;
use hems_core::data_io::{load_demand_csv, load_weather_csv, synth_scenario, Series};
use hems_core::domain::{ScenarioConfig, ALPHA_BAT_GRID, ALPHA_I_GRID, ALPHA_PV_GRID};
use hems_core::report::{run_charts, sweep_charts, write_metrics_csv, write_trajectory_csv, ReportOptions};
use hems_core::sim::{simulate, RunResult};

#[derive(Parser)]
#[command(name = "hems", version, about = "Off-grid PV/battery/AC house simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one controller on one case.
    Run(RunArgs),
    /// Simulate every grid case with every controller.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Scenario configuration (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weather CSV.
    #[arg(long, requires = "loads", conflicts_with = "synth")]
    weather: Option<PathBuf>,
    /// Demand CSV.
    #[arg(long, requires = "weather")]
    loads: Option<PathBuf>,
    /// Generate synthetic data from this seed.
    #[arg(long)]
    synth: Option<u64>,
    /// Days to simulate.
    #[arg(long, default_value_t = 7)]
    days: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Use a 6-hour MPC horizon and a node cap per solve.
    #[arg(long)]
    desk: bool,
    /// Leave solve times out of the outputs so they are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    controller: ControllerKind,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Keep only matching runs, e.g. `alpha_i=4` or `controller=mpc`. Repeatable.
    #[arg(long, value_name = "K=V")]
    subset: Vec<String>,
}

fn load_config(data: &DataArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &data.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::default(),
    };
    if data.desk {
        cfg = cfg.desk();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_series(data: &DataArgs, cfg: &ScenarioConfig) -> Result<Series> {
    if data.days == 0 {
        bail!("--days must be at least 1");
    }
    let steps = ((24.0 / cfg.step_hours).round() as usize) * data.days;
    match (&data.weather, &data.loads, data.synth) {
        (Some(w), Some(l), None) => {
            let weather = load_weather_csv(w, cfg.step_hours).with_context(|| format!("reading {}", w.display()))?;
            let demand =
                load_demand_csv(l, cfg.n_circuits, cfg.step_hours).with_context(|| format!("reading {}", l.display()))?;
            Ok(Series::combine(&weather, &demand)?.truncated(steps))
        }
        (None, None, Some(seed)) => Ok(synth_scenario(seed, data.days, cfg.n_circuits, cfg.step_hours)),
        _ => bail!("give either --weather and --loads, or --synth SEED"),
    }
}

fn timestamps(series: &Series) -> Vec<String> {
    series.timestamps.iter().map(|t| t.format("%Y-%m-%dT%H:%M:%S").to_string()).collect()
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(&args.data)?;
    let series = load_series(&args.data, &cfg)?;
    let opts = ReportOptions { timing: !args.data.no_timing };
    create_dir(&args.data.out)?;
    log::info!("running {} on {} steps", args.controller, series.len());
    let r = simulate(args.controller, &cfg, &series.records)?;
    write_trajectory_csv(&args.data.out.join("trajectory.csv"), &r, &timestamps(&series), opts)?;
    write_metrics_csv(&args.data.out.join("metrics.csv"), &[&r], opts)?;
    run_charts(&args.data.out, &r)?;
    let m = &r.metrics;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "{}: lrm_cri={} lrm_o={} trm_h={:.4} trips={}",
        r.kind,
        show(m.lrm_cri),
        show(m.lrm_o),
        m.trm_h,
        m.trip_steps
    );
    Ok(())
}

#[derive(Debug, Default)]
struct Subset {
    alpha_i: Option<f64>,
    alpha_pv: Option<f64>,
    alpha_bat: Option<f64>,
    controller: Option<ControllerKind>,
}

fn parse_subset(items: &[String]) -> Result<Subset> {
    let mut s = Subset::default();
    for item in items {
        let Some((k, v)) = item.split_once('=') else { bail!("--subset expects K=V, got '{item}'") };
        let num = || v.trim().parse::<f64>().with_context(|| format!("--subset {k}: bad number '{v}'"));
        match k.trim() {
            "alpha_i" => s.alpha_i = Some(num()?),
            "alpha_pv" => s.alpha_pv = Some(num()?),
            "alpha_bat" => s.alpha_bat = Some(num()?),
            "controller" => s.controller = Some(v.trim().parse().map_err(anyhow::Error::msg)?),
            other => bail!("--subset: unknown key '{other}' (alpha_i, alpha_pv, alpha_bat, controller)"),
        }
    }
    Ok(s)
}

fn grid_cases() -> Vec<(f64, f64, f64)> {
    let mut cases = Vec::new();
    for ai in ALPHA_I_GRID {
        for apv in ALPHA_PV_GRID {
            for abat in ALPHA_BAT_GRID {
                cases.push((ai, apv, abat));
            }
        }
    }
    cases
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let cfg = load_config(&args.data)?;
    let series = load_series(&args.data, &cfg)?;
    let subset = parse_subset(&args.subset)?;
    let opts = ReportOptions { timing: !args.data.no_timing };
    create_dir(&args.data.out)?;

    let cases = grid_cases();
    let keep = |v: f64, f: Option<f64>| f.is_none_or(|x| (x - v).abs() < 1e-12);
    let mut jobs = Vec::new();
    for &(ai, apv, abat) in &cases {
        if !(keep(ai, subset.alpha_i) && keep(apv, subset.alpha_pv) && keep(abat, subset.alpha_bat)) {
            continue;
        }
        for kind in ControllerKind::ALL {
            if subset.controller.is_none_or(|k| k == kind) {
                jobs.push((cfg.with_case(ai, apv, abat), kind));
            }
        }
    }
    if jobs.is_empty() {
        bail!("--subset matches no grid case");
    }
    log::info!("sweeping {} runs on {} threads", jobs.len(), args.parallel.max(1));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.parallel.max(1)).build()?;
    let outcomes: Vec<Result<RunResult, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|(c, kind)| {
                let r = simulate(*kind, c, &series.records);
                log::info!("done {kind} alpha_i={} alpha_pv={} alpha_bat={}", c.alpha_i, c.alpha_pv, c.alpha_bat);
                r.map_err(|e| format!("{kind} alpha_i={} alpha_pv={} alpha_bat={}: {e}", c.alpha_i, c.alpha_pv, c.alpha_bat))
            })
            .collect()
    });
    let ok: Vec<&RunResult> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    write_metrics_csv(&args.data.out.join("metrics.csv"), &ok, opts)?;
    sweep_charts(&args.data.out, &ok, &cases)?;
    let failed: Vec<&String> = outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    println!("{} of {} runs written to {}", ok.len(), outcomes.len(), args.data.out.display());
    for f in &failed {
        eprintln!("failed: {f}");
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
