//! Trajectory and metric tables, and static SVG charts.

use std::path::Path;

use anyhow::{Context, Result};
use plotters::prelude::*;

use crate::controller::ControllerKind;
use crate::domain::derive;
use crate::sim::RunResult;

pub const METRICS_HEADER: [&str; 9] =
    ["controller", "alpha_i", "alpha_pv", "alpha_bat", "lrm_cri", "lrm_o", "trm_h", "trip_steps", "mean_solve_ms"];

/// Output formatting switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Write wall-clock solve times; off makes every file byte-reproducible.
    pub timing: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn metrics_row(r: &RunResult, opts: ReportOptions) -> Vec<String> {
    let m = &r.metrics;
    vec![
        r.kind.name().to_string(),
        r.cfg.alpha_i.to_string(),
        r.cfg.alpha_pv.to_string(),
        r.cfg.alpha_bat.to_string(),
        opt(m.lrm_cri),
        opt(m.lrm_o),
        format!("{:.6}", m.trm_h),
        m.trip_steps.to_string(),
        if opts.timing { m.mean_solve_ms.map(|x| format!("{x:.3}")).unwrap_or_default() } else { String::new() },
    ]
}

pub fn write_metrics_csv(path: &Path, results: &[&RunResult], opts: ReportOptions) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(METRICS_HEADER)?;
    for r in results {
        w.write_record(metrics_row(r, opts))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(path: &Path, r: &RunResult, timestamps: &[String], opts: ReportOptions) -> Result<()> {
    let tb = r.cfg.time_base(r.trajectory.len().max(1))?;
    let dp = derive(&r.cfg, &tb)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "step",
        "timestamp",
        "t_house_c",
        "e_bat_kwh",
        "t_ambient_c",
        "ghi_kw_m2",
        "e_pv_avail_kwh",
        "e_pv_used_kwh",
        "demand_kwh",
        "demand_cri_kwh",
        "cmd_charge",
        "cmd_discharge",
        "cmd_ac",
        "cmd_circuits",
        "ac_served",
        "served_ac_kwh",
        "served_load_kwh",
        "served_cri_kwh",
        "battery_bus_kwh",
        "curtailed_kwh",
        "tripped",
        "mpc_status",
        "mpc_objective",
        "mpc_gap",
        "mpc_nodes",
        "mpc_solve_ms",
        "mpc_fallback",
        "rule_branch",
    ])?;
    let bit = |b: bool| if b { "1" } else { "0" }.to_string();
    for (k, s) in r.trajectory.steps.iter().enumerate() {
        let o = &s.outcome;
        let st = s.state();
        let circuits: String = s.command.circuits_on.iter().map(|u| if *u { '1' } else { '0' }).collect();
        let (status, obj, gap, nodes, ms, fallback) = match &s.mpc {
            Some(d) => (
                d.status.map(|x| format!("{x:?}")).unwrap_or_default(),
                format!("{:.9}", d.objective),
                format!("{:.6}", d.gap),
                d.nodes.to_string(),
                if opts.timing { format!("{:.3}", d.solve_ms) } else { String::new() },
                bit(d.fallback),
            ),
            None => Default::default(),
        };
        let branch = s.rule.map(|(_, b)| format!("{b:?}")).unwrap_or_default();
        w.write_record([
            k.to_string(),
            timestamps.get(k).cloned().unwrap_or_default(),
            format!("{:.6}", st.t_house_c),
            format!("{:.6}", st.e_bat_kwh),
            format!("{:.6}", s.record.t_ambient_c),
            format!("{:.6}", s.record.ghi_kw_m2),
            format!("{:.6}", o.e_pv_avail_kwh),
            format!("{:.6}", o.e_pv_used_kwh),
            format!("{:.6}", s.record.total_demand_kwh()),
            format!("{:.6}", s.record.critical_demand_kwh()),
            bit(s.command.charge),
            bit(s.command.discharge),
            bit(s.command.ac_on),
            circuits,
            bit(o.ac_served),
            format!("{:.6}", o.served_ac_kwh(&dp)),
            format!("{:.6}", o.served_load_kwh()),
            format!("{:.6}", o.served_circuit_kwh.first().copied().unwrap_or(0.0)),
            format!("{:.6}", o.battery_bus_kwh),
            format!("{:.6}", o.curtailed_kwh),
            bit(o.tripped),
            status,
            obj,
            gap,
            nodes,
            ms,
            fallback,
            branch,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn plot_err<E: std::fmt::Debug>(e: E) -> anyhow::Error {
    anyhow::anyhow!("chart: {e:?}")
}

fn controller_color(k: ControllerKind) -> RGBColor {
    match k {
        ControllerKind::Baseline => RGBColor(200, 60, 40),
        ControllerKind::RuleBased => RGBColor(40, 120, 200),
        ControllerKind::Mpc => RGBColor(40, 160, 80),
    }
}

type Curve<'a> = (&'a str, RGBColor, Vec<f64>);

fn line_chart(path: &Path, title: &str, y_label: &str, step_hours: f64, curves: &[Curve<'_>]) -> Result<()> {
    let n = curves.iter().map(|c| c.2.len()).max().unwrap_or(0).max(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in curves.iter().flat_map(|c| c.2.iter()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    let x_max = (n - 1) as f64 * step_hours;
    let root = SVGBackend::new(path, (1000, 360)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(0.0..x_max, (lo - pad)..(hi + pad))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("hours")
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    for (name, color, ys) in curves {
        let color = *color;
        chart
            .draw_series(LineSeries::new(ys.iter().enumerate().map(|(k, y)| (k as f64 * step_hours, *y)), color))
            .map_err(plot_err)?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Temperature, battery, load and PV panels for one run.
pub fn run_charts(dir: &Path, r: &RunResult) -> Result<()> {
    let steps = &r.trajectory.steps;
    let dt = r.cfg.step_hours;
    let col = |f: &dyn Fn(&crate::metrics::TrajectoryStep) -> f64| steps.iter().map(f).collect::<Vec<f64>>();
    let grey = RGBColor(120, 120, 120);
    let main = controller_color(r.kind);
    line_chart(
        &dir.join("temperature.svg"),
        &format!("House temperature ({})", r.kind),
        "°C",
        dt,
        &[
            ("house", main, col(&|s| s.state().t_house_c)),
            ("ambient", grey, col(&|s| s.record.t_ambient_c)),
            ("upper bound", BLACK, vec![r.cfg.t_upper_c; steps.len()]),
        ],
    )?;
    line_chart(&dir.join("battery.svg"), &format!("Battery energy ({})", r.kind), "kWh", dt, &[("stored", main, col(&|s| s.state().e_bat_kwh))])?;
    line_chart(
        &dir.join("load.svg"),
        &format!("Circuit load ({})", r.kind),
        "kWh per step",
        dt,
        &[("demand", grey, col(&|s| s.record.total_demand_kwh())), ("served", main, col(&|s| s.outcome.served_load_kwh()))],
    )?;
    line_chart(
        &dir.join("pv.svg"),
        &format!("PV energy ({})", r.kind),
        "kWh per step",
        dt,
        &[("available", grey, col(&|s| s.outcome.e_pv_avail_kwh)), ("used", main, col(&|s| s.outcome.e_pv_used_kwh))],
    )?;
    Ok(())
}

/// One scatter per metric: value against case index, colored by controller.
pub fn sweep_charts(dir: &Path, results: &[&RunResult], cases: &[(f64, f64, f64)]) -> Result<()> {
    let case_index = |r: &RunResult| {
        cases.iter().position(|&(ai, apv, abat)| ai == r.cfg.alpha_i && apv == r.cfg.alpha_pv && abat == r.cfg.alpha_bat).unwrap_or(0)
    };
    type Pick = fn(&RunResult) -> Option<f64>;
    let metrics: [(&str, &str, Pick); 3] = [
        ("lrm_cri", "critical load served", |r| r.metrics.lrm_cri),
        ("lrm_o", "all load served", |r| r.metrics.lrm_o),
        ("trm_h", "thermal margin (°C)", |r| Some(r.metrics.trm_h)),
    ];
    for (file, label, pick) in metrics {
        let pts: Vec<(ControllerKind, f64, f64)> =
            results.iter().filter_map(|r| pick(r).map(|v| (r.kind, case_index(r) as f64, v))).collect();
        let hi = pts.iter().map(|p| p.2).fold(0.0f64, f64::max).max(1e-3) * 1.05;
        let path = dir.join(format!("{file}.svg"));
        let root = SVGBackend::new(&path, (1000, 380)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{label} by case"), ("sans-serif", 18))
            .margin(10)
            .x_label_area_size(35)
            .y_label_area_size(55)
            .build_cartesian_2d(-1.0..cases.len() as f64, 0.0..hi)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("case (alpha_i, alpha_pv, alpha_bat order)")
            .y_desc(label)
            .draw()
            .map_err(plot_err)?;
        for kind in ControllerKind::ALL {
            let color = controller_color(kind);
            chart
                .draw_series(pts.iter().filter(|p| p.0 == kind).map(|p| Circle::new((p.1, p.2), 3, color.filled())))
                .map_err(plot_err)?
                .label(kind.name())
                .legend(move |(x, y)| Circle::new((x + 8, y), 3, color.filled()));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(())
}
