use hems_core::data_io::{
    forecast_window, load_weather_csv, read_demand_csv, read_weather_csv, synth_scenario, write_demand_csv,
    write_weather_csv, DataError, Series,
};

const DT: f64 = 1.0 / 6.0;

fn weather(rows: &[&str]) -> String {
    let mut s = "timestamp,ghi_kw_m2,t_ambient_c,wind_m_s\n".to_string();
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

#[test]
fn weather_errors() {
    let ok = ["2020-06-01T00:00:00,0,25,1", "2020-06-01T00:10:00,0.2,25.5,1.2"];
    assert_eq!(read_weather_csv(weather(&ok).as_bytes(), DT).unwrap().len(), 2);

    let gap = ["2020-06-01T00:00:00,0,25,1", "2020-06-01T00:30:00,0,25,1"];
    assert!(matches!(read_weather_csv(weather(&gap).as_bytes(), DT), Err(DataError::NonUniformStep { row: 2 })));

    let back = ["2020-06-01T00:10:00,0,25,1", "2020-06-01T00:00:00,0,25,1"];
    assert!(matches!(read_weather_csv(weather(&back).as_bytes(), DT), Err(DataError::NonMonotone { .. })));

    let watts = ["2020-06-01T12:00:00,850,31,2"];
    assert!(matches!(read_weather_csv(weather(&watts).as_bytes(), DT), Err(DataError::UnitRange { row: 1, .. })));

    let junk = ["2020-06-01T12:00:00,abc,31,2"];
    assert!(matches!(read_weather_csv(weather(&junk).as_bytes(), DT), Err(DataError::BadNumber { .. })));

    let stamp = ["yesterday,0,31,2"];
    assert!(matches!(read_weather_csv(weather(&stamp).as_bytes(), DT), Err(DataError::BadTimestamp { .. })));

    assert!(matches!(read_weather_csv(weather(&[]).as_bytes(), DT), Err(DataError::Empty)));
    let no_wind = "timestamp,ghi_kw_m2,t_ambient_c\n2020-06-01T00:00:00,0,25\n";
    assert!(matches!(read_weather_csv(no_wind.as_bytes(), DT), Err(DataError::MissingColumn(c)) if c == "wind_m_s"));
    assert!(matches!(load_weather_csv("/nonexistent/weather.csv", DT), Err(DataError::Io { .. })));
}

#[test]
fn demand_errors() {
    let head = "timestamp,p1_kwh,p2_kwh\n";
    let ok = format!("{head}2020-06-01T00:00:00,0.1,0.2\n2020-06-01T00:10:00,0.1,0.0\n");
    assert_eq!(read_demand_csv(ok.as_bytes(), 2, DT).unwrap()[1].circuit_demand_kwh, vec![0.1, 0.0]);
    assert!(matches!(read_demand_csv(ok.as_bytes(), 3, DT), Err(DataError::ColumnCount { expected: 3, got: 2 })));
    let neg = format!("{head}2020-06-01T00:00:00,0.1,-0.2\n");
    assert!(matches!(read_demand_csv(neg.as_bytes(), 2, DT), Err(DataError::NegativeDemand { row: 1 })));
    let swapped = "timestamp,p2_kwh,p1_kwh\n2020-06-01T00:00:00,0.2,0.1\n";
    assert_eq!(read_demand_csv(swapped.as_bytes(), 2, DT).unwrap()[0].circuit_demand_kwh, vec![0.1, 0.2]);
}

#[test]
fn synthetic_data_round_trips_through_csv() {
    let s = synth_scenario(3, 2, 8, DT);
    assert_eq!(s.len(), 288);
    let mut w = Vec::new();
    write_weather_csv(&mut w, &s.weather()).unwrap();
    let mut d = Vec::new();
    write_demand_csv(&mut d, &s.demand()).unwrap();
    let back = Series::combine(&read_weather_csv(w.as_slice(), DT).unwrap(), &read_demand_csv(d.as_slice(), 8, DT).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn synthetic_data_is_seeded_and_plausible() {
    let a = synth_scenario(9, 1, 8, DT);
    assert_eq!(a, synth_scenario(9, 1, 8, DT));
    assert_ne!(a, synth_scenario(10, 1, 8, DT));
    for (k, r) in a.records.iter().enumerate() {
        let hour = k as f64 * DT;
        assert!((0.0..=1.0).contains(&r.ghi_kw_m2));
        if !(6.0..=19.5).contains(&hour) {
            assert_eq!(r.ghi_kw_m2, 0.0, "sun at {hour} h");
        }
        assert!(r.critical_demand_kwh() > 0.0);
        assert!(r.circuit_demand_kwh.iter().all(|e| *e >= 0.0));
    }
}

#[test]
fn forecast_window_pads_with_zero_sun_and_demand() {
    let s = synth_scenario(1, 1, 8, DT);
    let fw = forecast_window(&s.records, 140, 10);
    assert_eq!(fw.records.len(), 10);
    assert_eq!(fw.records[0], s.records[140]);
    assert_eq!(fw.records[3], s.records[143]);
    let pad = &fw.records[9];
    assert_eq!(pad.ghi_kw_m2, 0.0);
    assert_eq!(pad.total_demand_kwh(), 0.0);
    assert_eq!(pad.t_ambient_c, s.records[143].t_ambient_c);
}

#[test]
fn mismatched_series_are_rejected() {
    let a = synth_scenario(1, 1, 8, DT);
    let b = synth_scenario(1, 2, 8, DT);
    assert!(matches!(Series::combine(&a.weather(), &b.demand()), Err(DataError::Mismatch(_))));
}
