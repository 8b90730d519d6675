//! Weather and demand series: CSV ingest and export, the synthetic generator,
//! and forecast windows.
//!
//! Weather CSV: `timestamp,ghi_kw_m2,t_ambient_c,wind_m_s`.
//! Demand CSV: `timestamp,p1_kwh,…,pn_kwh`, circuits in descending priority.
//! Timestamps are ISO-8601 and must advance by exactly one step.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeDelta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::controller::ForecastWindow;
use crate::domain::ExogenousRecord;

/// Irradiance above this is rejected as a unit error (W/m² passed as kW/m²).
pub const MAX_GHI_KW_M2: f64 = 1.5;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("no data rows")]
    Empty,
    #[error("row {row}: bad timestamp '{value}'")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: bad number '{value}'")]
    BadNumber { row: usize, value: String },
    #[error("row {row}: timestamps are not increasing")]
    NonMonotone { row: usize },
    #[error("row {row}: timestamp does not advance by one step")]
    NonUniformStep { row: usize },
    #[error("row {row}: {msg}")]
    UnitRange { row: usize, msg: String },
    #[error("expected {expected} demand columns, found {got}")]
    ColumnCount { expected: usize, got: usize },
    #[error("row {row}: negative demand")]
    NegativeDemand { row: usize },
    #[error("weather and demand series differ: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherRow {
    pub timestamp: NaiveDateTime,
    pub ghi_kw_m2: f64,
    pub t_ambient_c: f64,
    pub wind_m_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandRow {
    pub timestamp: NaiveDateTime,
    pub circuit_demand_kwh: Vec<f64>,
}

/// Aligned weather and demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub timestamps: Vec<NaiveDateTime>,
    pub records: Vec<ExogenousRecord>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn combine(weather: &[WeatherRow], demand: &[DemandRow]) -> Result<Self, DataError> {
        if weather.len() != demand.len() {
            return Err(DataError::Mismatch(format!("{} weather rows, {} demand rows", weather.len(), demand.len())));
        }
        let mut timestamps = Vec::with_capacity(weather.len());
        let mut records = Vec::with_capacity(weather.len());
        for (i, (w, d)) in weather.iter().zip(demand).enumerate() {
            if w.timestamp != d.timestamp {
                return Err(DataError::Mismatch(format!("timestamps differ at row {}", i + 1)));
            }
            timestamps.push(w.timestamp);
            records.push(ExogenousRecord {
                ghi_kw_m2: w.ghi_kw_m2,
                t_ambient_c: w.t_ambient_c,
                wind_m_s: w.wind_m_s,
                circuit_demand_kwh: d.circuit_demand_kwh.clone(),
            });
        }
        Ok(Self { timestamps, records })
    }

    pub fn weather(&self) -> Vec<WeatherRow> {
        self.timestamps
            .iter()
            .zip(&self.records)
            .map(|(t, r)| WeatherRow { timestamp: *t, ghi_kw_m2: r.ghi_kw_m2, t_ambient_c: r.t_ambient_c, wind_m_s: r.wind_m_s })
            .collect()
    }

    pub fn demand(&self) -> Vec<DemandRow> {
        self.timestamps
            .iter()
            .zip(&self.records)
            .map(|(t, r)| DemandRow { timestamp: *t, circuit_demand_kwh: r.circuit_demand_kwh.clone() })
            .collect()
    }

    /// First `steps` records.
    pub fn truncated(&self, steps: usize) -> Self {
        let k = steps.min(self.len());
        Self { timestamps: self.timestamps[..k].to_vec(), records: self.records[..k].to_vec() }
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .ok()
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|t| t.naive_utc()))
}

fn step_delta(step_hours: f64) -> TimeDelta {
    TimeDelta::seconds((step_hours * 3600.0).round() as i64)
}

fn check_cadence(stamps: &[NaiveDateTime], step_hours: f64) -> Result<(), DataError> {
    let step = step_delta(step_hours);
    for (i, w) in stamps.windows(2).enumerate() {
        let row = i + 2;
        if w[1] <= w[0] {
            return Err(DataError::NonMonotone { row });
        }
        if w[1] - w[0] != step {
            return Err(DataError::NonUniformStep { row });
        }
    }
    Ok(())
}

fn open(path: &Path) -> Result<std::fs::File, DataError> {
    std::fs::File::open(path).map_err(|e| DataError::Io { path: path.display().to_string(), msg: e.to_string() })
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn number(rec: &csv::StringRecord, col: usize, row: usize) -> Result<f64, DataError> {
    let s = rec.get(col).unwrap_or("").trim();
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::BadNumber { row, value: s.to_string() }),
    }
}

fn timestamp(rec: &csv::StringRecord, col: usize, row: usize) -> Result<NaiveDateTime, DataError> {
    let s = rec.get(col).unwrap_or("");
    parse_timestamp(s).ok_or_else(|| DataError::BadTimestamp { row, value: s.to_string() })
}

pub fn load_weather_csv(path: impl AsRef<Path>, step_hours: f64) -> Result<Vec<WeatherRow>, DataError> {
    read_weather_csv(open(path.as_ref())?, step_hours)
}

pub fn read_weather_csv(reader: impl Read, step_hours: f64) -> Result<Vec<WeatherRow>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (c_t, c_g, c_a, c_w) = (
        column(&headers, "timestamp")?,
        column(&headers, "ghi_kw_m2")?,
        column(&headers, "t_ambient_c")?,
        column(&headers, "wind_m_s")?,
    );
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let w = WeatherRow {
            timestamp: timestamp(&rec, c_t, row)?,
            ghi_kw_m2: number(&rec, c_g, row)?,
            t_ambient_c: number(&rec, c_a, row)?,
            wind_m_s: number(&rec, c_w, row)?,
        };
        if !(0.0..=MAX_GHI_KW_M2).contains(&w.ghi_kw_m2) {
            return Err(DataError::UnitRange { row, msg: format!("GHI {} kW/m² outside [0, {MAX_GHI_KW_M2}]", w.ghi_kw_m2) });
        }
        if !(-60.0..=70.0).contains(&w.t_ambient_c) {
            return Err(DataError::UnitRange { row, msg: format!("ambient {} °C implausible", w.t_ambient_c) });
        }
        if w.wind_m_s < 0.0 {
            return Err(DataError::UnitRange { row, msg: "negative wind speed".into() });
        }
        rows.push(w);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    check_cadence(&rows.iter().map(|r| r.timestamp).collect::<Vec<_>>(), step_hours)?;
    Ok(rows)
}

pub fn load_demand_csv(path: impl AsRef<Path>, n_circuits: usize, step_hours: f64) -> Result<Vec<DemandRow>, DataError> {
    read_demand_csv(open(path.as_ref())?, n_circuits, step_hours)
}

pub fn read_demand_csv(reader: impl Read, n_circuits: usize, step_hours: f64) -> Result<Vec<DemandRow>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let c_t = column(&headers, "timestamp")?;
    let demand_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != c_t).collect();
    if demand_cols.len() != n_circuits {
        return Err(DataError::ColumnCount { expected: n_circuits, got: demand_cols.len() });
    }
    let mut ordered = Vec::with_capacity(n_circuits);
    for i in 1..=n_circuits {
        ordered.push(column(&headers, &format!("p{i}_kwh"))?);
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let mut v = Vec::with_capacity(n_circuits);
        for &c in &ordered {
            let e = number(&rec, c, row)?;
            if e < 0.0 {
                return Err(DataError::NegativeDemand { row });
            }
            v.push(e);
        }
        rows.push(DemandRow { timestamp: timestamp(&rec, c_t, row)?, circuit_demand_kwh: v });
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    check_cadence(&rows.iter().map(|r| r.timestamp).collect::<Vec<_>>(), step_hours)?;
    Ok(rows)
}

pub fn write_weather_csv(writer: impl Write, rows: &[WeatherRow]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "ghi_kw_m2", "t_ambient_c", "wind_m_s"])?;
    for r in rows {
        w.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            r.ghi_kw_m2.to_string(),
            r.t_ambient_c.to_string(),
            r.wind_m_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| DataError::Io { path: "<writer>".into(), msg: e.to_string() })
}

pub fn write_demand_csv(writer: impl Write, rows: &[DemandRow]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let n = rows.first().map_or(0, |r| r.circuit_demand_kwh.len());
    let mut header = vec!["timestamp".to_string()];
    header.extend((1..=n).map(|i| format!("p{i}_kwh")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.timestamp.format(TIMESTAMP_FORMAT).to_string()];
        rec.extend(r.circuit_demand_kwh.iter().map(|e| e.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| DataError::Io { path: "<writer>".into(), msg: e.to_string() })
}

/// Start of every synthetic series.
pub fn synth_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2017, 9, 11).and_then(|d| d.and_hms_opt(0, 0, 0)).expect("valid date")
}

/// Rated power (kW) of each circuit's appliance pulses, by priority.
const PULSE_KW: [f64; 8] = [0.3, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0];
/// Always-on draw of the critical circuit (kW).
const CRITICAL_FLOOR_KW: f64 = 0.12;

/// Per-step chance that an idle circuit starts a pulse, by hour of day.
fn pulse_probability(hour: f64) -> f64 {
    match hour {
        h if h < 6.0 => 0.02,
        h if h < 9.0 => 0.08,
        h if h < 17.0 => 0.04,
        h if h < 23.0 => 0.10,
        _ => 0.03,
    }
}

/// Deterministic synthetic week-style data for `days` days at `step_hours`.
///
/// Weather, per day `d`:
/// - clear-sky factor `a_d ~ U(0.6, 1.0)`;
/// - `GHI = min(1, 1.05·a_d·sin(π(h − 6.5)/12.5))` for `6.5 ≤ h ≤ 19`, else 0,
///   times a per-step cloud factor `U(0.9, 1.0)`;
/// - `T_am = 30 + s_d·sin(2π(h − 9)/24)` with swing `s_d ~ U(4, 6)`, so the
///   ambient stays in 24–36 °C and peaks at 34 °C or more at 15:00;
/// - wind `U(1, 3)` m/s.
///
/// Demand: circuit 1 draws a constant 0.12 kW floor; every circuit `i` starts
/// appliance pulses of `PULSE_KW[i]` lasting 1–6 steps, with an hourly start
/// probability peaking in the morning and evening. Values are kWh per step.
pub fn synth_scenario(seed: u64, days: usize, n_circuits: usize, step_hours: f64) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_day = (24.0 / step_hours).round() as usize;
    let start = synth_start();
    let step = step_delta(step_hours);
    let mut remaining = vec![0usize; n_circuits];
    let mut timestamps = Vec::with_capacity(days * per_day);
    let mut records = Vec::with_capacity(days * per_day);
    for d in 0..days {
        let clear: f64 = rng.random_range(0.6..1.0);
        let swing: f64 = rng.random_range(4.0..6.0);
        for s in 0..per_day {
            let k = d * per_day + s;
            let hour = s as f64 * step_hours;
            let cloud: f64 = rng.random_range(0.9..1.0);
            let ghi = if (6.5..=19.0).contains(&hour) {
                (1.05 * clear * (std::f64::consts::PI * (hour - 6.5) / 12.5).sin()).clamp(0.0, 1.0) * cloud
            } else {
                0.0
            };
            let t_am = 30.0 + swing * (2.0 * std::f64::consts::PI * (hour - 9.0) / 24.0).sin();
            let wind: f64 = rng.random_range(1.0..3.0);
            let p = pulse_probability(hour);
            let mut demand = vec![0.0; n_circuits];
            for i in 0..n_circuits {
                if remaining[i] == 0 && rng.random_bool(p) {
                    remaining[i] = rng.random_range(1..=6);
                }
                let mut kw = if i == 0 { CRITICAL_FLOOR_KW } else { 0.0 };
                if remaining[i] > 0 {
                    remaining[i] -= 1;
                    kw += PULSE_KW[i % PULSE_KW.len()];
                }
                demand[i] = kw * step_hours;
            }
            timestamps.push(start + step * k as i32);
            records.push(ExogenousRecord { ghi_kw_m2: ghi, t_ambient_c: t_am, wind_m_s: wind, circuit_demand_kwh: demand });
        }
    }
    Series { timestamps, records }
}

/// Perfect forecast of `n` records from `start`. Past the end, records have no
/// sun and no demand and keep the last real ambient temperature and wind.
pub fn forecast_window(records: &[ExogenousRecord], start: usize, n: usize) -> ForecastWindow {
    assert!(start < records.len(), "forecast start {start} outside a series of {}", records.len());
    let last = &records[records.len() - 1];
    let pad = ExogenousRecord {
        ghi_kw_m2: 0.0,
        t_ambient_c: last.t_ambient_c,
        wind_m_s: last.wind_m_s,
        circuit_demand_kwh: vec![0.0; last.circuit_demand_kwh.len()],
    };
    let out = (start..start + n).map(|k| records.get(k).cloned().unwrap_or_else(|| pad.clone())).collect();
    ForecastWindow { records: out }
}
