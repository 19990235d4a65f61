//! CSV persistence of result rows.
//!
//! The per-UAV columns repeat for every UAV, so a two-UAV scenario gets
//!
//! ```text
//! scenario_id,scheme,seed,sweep_kind,sweep_value,ee_1,ee_2,ee_sum,rate_c_1,rate_c_2,rate_p_1,rate_p_2,power_used_w,iterations,converged
//! ```

use std::path::Path;

use super::{ResultRow, SweepKind};
use crate::error::{Error, Result};

/// Column names for `k` UAVs.
pub fn csv_header(k: usize) -> Vec<String> {
    let per_uav = |prefix: &'static str| (1..=k).map(move |i| format!("{prefix}_{i}"));
    let mut cols: Vec<String> = ["scenario_id", "scheme", "seed", "sweep_kind", "sweep_value"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(per_uav("ee"));
    cols.push("ee_sum".into());
    cols.extend(per_uav("rate_c"));
    cols.extend(per_uav("rate_p"));
    cols.extend(["power_used_w", "iterations", "converged"].map(String::from));
    cols
}

/// `printf("%.9g")`: 9 significant digits, trailing zeros dropped,
/// exponent form outside `[1e-5, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 9;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa.to_string()), exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        if let csv::ErrorKind::Io(source) = err.into_kind() {
            return Error::Io {
                path: path.to_path_buf(),
                source,
            };
        }
        unreachable!("is_io_error implies an Io kind");
    }
    Error::Parse {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

fn record(row: &ResultRow) -> Vec<String> {
    let mut out = vec![
        row.scenario_id.clone(),
        row.scheme.to_string(),
        row.seed.to_string(),
        row.sweep_kind.to_string(),
        format_sig9(row.sweep_value),
    ];
    out.extend(row.ee.iter().map(|v| format_sig9(*v)));
    out.push(format_sig9(row.ee_sum));
    out.extend(row.rate_common.iter().map(|v| format_sig9(*v)));
    out.extend(row.rate_private.iter().map(|v| format_sig9(*v)));
    out.push(format_sig9(row.power_used_w));
    out.push(row.iterations.to_string());
    out.push(row.converged.to_string());
    out
}

/// Writes rows in the given order. All rows must describe the same number
/// of UAVs; an empty list produces the two-UAV header alone.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let k = rows.first().map_or(2, |r| r.ee.len());
    if let Some(bad) = rows
        .iter()
        .find(|r| r.ee.len() != k || r.rate_common.len() != k || r.rate_private.len() != k)
    {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "rows mix UAV counts ({k} and {}) in scenario `{}`",
                bad.ee.len(),
                bad.scenario_id
            ),
        });
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    writer.write_record(csv_header(k)).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.write_record(record(row)).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a file produced by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let k = header
        .iter()
        .filter(|h| h.starts_with("ee_") && *h != "ee_sum")
        .count();
    if header != csv_header(k) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header `{}`", header.join(",")),
        });
    }
    let bad = |line: usize, what: &str| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: bad {what}"),
    };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let float = |j: usize| rec[j].parse::<f64>().map_err(|_| bad(line, &header[j]));
        let floats = |from: usize| (from..from + k).map(float).collect::<Result<Vec<_>>>();
        let c = 5 + k;
        rows.push(ResultRow {
            scenario_id: rec[0].to_string(),
            scheme: rec[1].parse().map_err(|_| bad(line, "scheme"))?,
            seed: rec[2].parse().map_err(|_| bad(line, "seed"))?,
            sweep_kind: rec[3].parse::<SweepKind>().map_err(|_| bad(line, "sweep_kind"))?,
            sweep_value: float(4)?,
            ee: floats(5)?,
            ee_sum: float(c)?,
            rate_common: floats(c + 1)?,
            rate_private: floats(c + 1 + k)?,
            power_used_w: float(c + 1 + 2 * k)?,
            iterations: rec[c + 2 + 2 * k].parse().map_err(|_| bad(line, "iterations"))?,
            converged: rec[c + 3 + 2 * k].parse().map_err(|_| bad(line, "converged"))?,
        });
    }
    Ok(rows)
}
