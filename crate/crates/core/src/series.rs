//! Interval time series: CSV ingestion and built-in meteorological profiles.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// Hand-digitized irradiance for the default day, W/m² (approximate).
pub const APPROX_IRRADIANCE: [f64; 24] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 40.0, 160.0, 330.0, 500.0, 640.0, 740.0, 780.0, 760.0, 680.0,
    550.0, 390.0, 220.0, 80.0, 10.0, 0.0, 0.0, 0.0, 0.0,
];

/// Hand-digitized wind speed for the default day, m/s (approximate).
pub const APPROX_WIND_SPEED: [f64; 24] = [
    7.8, 8.1, 8.3, 8.0, 7.6, 7.1, 6.4, 5.6, 4.9, 4.3, 3.9, 3.6, 3.4, 3.5, 3.8, 4.1, 4.4, 4.6, 4.9,
    5.4, 6.0, 6.6, 7.1, 7.5,
];

/// Smooth day profile over `n` intervals: irradiance is a half sine between
/// 06:00 and 18:00 peaking at `peak_irradiance`, wind a cosine peaking at 02:00.
pub fn synthetic_profile(
    n: usize,
    peak_irradiance: f64,
    mean_wind: f64,
    wind_swing: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut irr = Vec::with_capacity(n);
    let mut wind = Vec::with_capacity(n);
    for k in 0..n {
        let hour = (k as f64 + 0.5) * 24.0 / n as f64;
        let sun = (PI * (hour - 6.0) / 12.0).sin();
        irr.push(if (6.0..=18.0).contains(&hour) {
            peak_irradiance * sun.max(0.0)
        } else {
            0.0
        });
        wind.push((mean_wind + wind_swing * (2.0 * PI * (hour - 2.0) / 24.0).cos()).max(0.0));
    }
    (irr, wind)
}

/// Parse `index,value` rows. The first row may be a header. Indices must be
/// 0-based and contiguous.
pub fn parse_series(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let parse_err = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_err(format!(
                "row {}: expected 2 columns, found {}",
                line + 1,
                record.len()
            )));
        }
        let Ok(index) = record[0].parse::<usize>() else {
            if line == 0 && rows.is_empty() {
                continue;
            }
            return Err(parse_err(format!(
                "row {}: interval index `{}` is not a non-negative integer",
                line + 1,
                &record[0]
            )));
        };
        let value: f64 = record[1].parse().map_err(|_| {
            parse_err(format!(
                "interval {index}: value `{}` is not a number",
                &record[1]
            ))
        })?;
        if !value.is_finite() {
            return Err(parse_err(format!(
                "interval {index}: value `{}` is not finite",
                &record[1]
            )));
        }
        rows.push((index, value));
    }
    if rows.is_empty() {
        return Err(parse_err("no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(parse_err(format!(
                "interval {} appears more than once",
                w[0].0
            )));
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for (expected, (index, value)) in rows.into_iter().enumerate() {
        if index != expected {
            return Err(parse_err(format!("interval {expected} is missing")));
        }
        out.push(value);
    }
    Ok(out)
}

pub fn load_series(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text, path)
}

/// `index,value` rendering accepted by [`parse_series`].
pub fn format_series(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}
