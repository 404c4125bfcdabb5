//! CSV formats: metaorder records, binned curves, price trajectories and
//! tabulated scaling functions.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::Serialize;

use llob_core::analysis::Bin;
use llob_core::params::Side;
use llob_core::records::{MetaorderRecord, Timestamp};

use crate::error::{CliError, Result};

pub const RECORD_HEADER: [&str; 12] =
    ["symbol", "sign", "Q", "t_start", "t_end", "p_start", "p_end", "V_T", "V_d", "P_high", "P_low", "P_open"];

pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::<Utc>::from_timestamp(t.0, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.0.to_string(),
    }
}

/// RFC 3339 with any offset, or a naive `YYYY-MM-DDTHH:MM:SS[.f]` read
/// as UTC. Fractions of a second are dropped.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp(dt.timestamp()));
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .map(|dt| Timestamp(dt.and_utc().timestamp()))
}

fn sign_text(side: Side) -> &'static str {
    match side {
        Side::Buy => "1",
        Side::Sell => "-1",
    }
}

pub fn write_records<W: Write>(out: W, records: &[MetaorderRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.symbol.clone(),
            sign_text(r.side).to_string(),
            r.q.to_string(),
            format_timestamp(r.t_start),
            format_timestamp(r.t_end),
            r.p_start.to_string(),
            r.p_end.to_string(),
            r.v_t.to_string(),
            r.v_d.to_string(),
            r.p_high.to_string(),
            r.p_low.to_string(),
            r.p_open.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<MetaorderRecord, String> {
    if row.len() != RECORD_HEADER.len() {
        return Err(format!("expected {} fields, found {}", RECORD_HEADER.len(), row.len()));
    }
    let num = |i: usize| -> std::result::Result<f64, String> {
        row[i].trim().parse::<f64>().map_err(|_| format!("{}: not a number: {:?}", RECORD_HEADER[i], &row[i]))
    };
    let time = |i: usize| -> std::result::Result<Timestamp, String> {
        parse_timestamp(row[i].trim()).ok_or_else(|| format!("{}: not an ISO-8601 timestamp: {:?}", RECORD_HEADER[i], &row[i]))
    };
    let side = match row[1].trim() {
        "1" | "+1" => Side::Buy,
        "-1" => Side::Sell,
        other => return Err(format!("sign: must be +1 or -1, found {other:?}")),
    };
    Ok(MetaorderRecord {
        symbol: row[0].to_string(),
        side,
        q: num(2)?,
        t_start: time(3)?,
        t_end: time(4)?,
        p_start: num(5)?,
        p_end: num(6)?,
        v_t: num(7)?,
        v_d: num(8)?,
        p_high: num(9)?,
        p_low: num(10)?,
        p_open: num(11)?,
    })
}

/// Parses a records file. Any row that does not fit the schema fails the
/// whole read, with every offending line listed. Rows that parse but break
/// the record invariants are left for rescaling to reject.
pub fn read_records<R: Read>(input: R, path: &Path) -> Result<Vec<MetaorderRecord>> {
    let schema = |rows: Vec<(usize, String)>| CliError::Schema { path: path.to_path_buf(), rows };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = reader.headers().map_err(|e| schema(vec![(1, e.to_string())]))?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(schema(vec![(1, format!("header must be `{}`", RECORD_HEADER.join(",")))]));
    }
    let mut records = Vec::new();
    let mut bad = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        match row.map_err(|e| e.to_string()).and_then(|r| parse_row(&r)) {
            Ok(rec) => records.push(rec),
            Err(msg) => bad.push((line, msg)),
        }
    }
    if bad.is_empty() {
        Ok(records)
    } else {
        Err(schema(bad))
    }
}

pub fn read_records_file(path: &Path) -> Result<Vec<MetaorderRecord>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_records(std::io::BufReader::new(file), path)
}

#[derive(Serialize)]
struct CurveRow {
    eta_mean: f64,
    #[serde(rename = "F_hat")]
    f_hat: f64,
    stderr: f64,
    count: usize,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    price: f64,
}

#[derive(Serialize)]
struct ScalingRow {
    eta: f64,
    #[serde(rename = "F")]
    f: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(out: W, bins: &[Bin]) -> csv::Result<()> {
    write_rows(out, bins.iter().map(|b| CurveRow { eta_mean: b.eta_mean, f_hat: b.f_hat, stderr: b.stderr, count: b.count }))
}

pub fn write_trajectory<W: Write>(out: W, times: &[f64], prices: &[f64]) -> csv::Result<()> {
    write_rows(out, times.iter().zip(prices).map(|(&t, &price)| TrajectoryRow { t, price }))
}

pub fn write_scaling<W: Write>(out: W, etas: &[f64], values: &[f64]) -> csv::Result<()> {
    write_rows(out, etas.iter().zip(values).map(|(&eta, &f)| ScalingRow { eta, f }))
}

/// Reads an `eta,F` table as written by [`write_scaling`].
pub fn read_scaling(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let schema = |rows| CliError::Schema { path: path.to_path_buf(), rows };
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| schema(vec![(1, e.to_string())]))?.clone();
    if header.iter().ne(["eta", "F"]) {
        return Err(schema(vec![(1, "header must be `eta,F`".into())]));
    }
    let (mut etas, mut values, mut bad) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let parsed = row.ok().filter(|r| r.len() == 2).and_then(|r| Some((r[0].parse::<f64>().ok()?, r[1].parse::<f64>().ok()?)));
        match parsed {
            Some((eta, f)) => {
                etas.push(eta);
                values.push(f);
            }
            None => bad.push((i + 2, "expected two numbers".to_string())),
        }
    }
    if bad.is_empty() {
        Ok((etas, values))
    } else {
        Err(schema(bad))
    }
}

pub fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    File::create(path).map(std::io::BufWriter::new).map_err(CliError::io(path))
}

pub fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e.into() }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
    writeln!(out).and_then(|_| out.flush()).map_err(CliError::io(path))
}
