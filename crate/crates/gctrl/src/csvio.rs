//! CSV files of a run. Floats are written as `{:.16e}` (17 significant
//! digits), which reads back to the same bits.

use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Writer};
use gctrl_core::evolution::{EventKind, EvolutionEvent};
use gctrl_core::fuzzy::RuleBase;
use gctrl_core::metrics::Metrics;
use gctrl_core::sim::{LogRow, TelemetryRow};

pub const LOG_HEADER: [&str; 10] = ["t", "z_ref", "z", "e", "u", "rule_count", "s_h", "alpha1", "phi", "theta"];
pub const EVENTS_HEADER: [&str; 4] = ["t", "kind", "rule_idx", "metric"];
pub const TELEMETRY_HEADER: [&str; 7] = ["t", "s_h", "alpha1", "alpha2", "alpha3", "rule_count", "min_gain_eigenvalue"];
pub const METRICS_HEADER: [&str; 10] = [
    "trajectory",
    "controller",
    "status",
    "rmse",
    "rmse_full",
    "rise_time",
    "settling_time",
    "peak_overshoot",
    "risen",
    "settled",
];

/// Reading failed: the IO or CSV layer, or well-formed CSV with the wrong content.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
}

pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_log<W: Write>(w: W, rows: &[LogRow]) -> csv::Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(LOG_HEADER)?;
    for r in rows {
        out.write_record([
            f(r.t),
            f(r.z_ref),
            f(r.z),
            f(r.e),
            f(r.u),
            r.rule_count.to_string(),
            f(r.s_h),
            f(r.alpha1),
            f(r.phi),
            f(r.theta),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn check_header(found: &StringRecord, expected: &[&str]) -> Result<(), ReadError> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(ReadError::Format(format!(
            "unexpected header {:?}, expected {}",
            found.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &StringRecord, i: usize, name: &str) -> Result<T, ReadError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = rec.position().map_or(0, |p| p.line());
        ReadError::Format(format!("line {line}: bad {name} {raw:?}"))
    })
}

pub fn read_log<R: Read>(r: R) -> Result<Vec<LogRow>, ReadError> {
    let mut rdr = ReaderBuilder::new().from_reader(r);
    check_header(rdr.headers()?, &LOG_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(LogRow {
            t: field(&rec, 0, "t")?,
            z_ref: field(&rec, 1, "z_ref")?,
            z: field(&rec, 2, "z")?,
            e: field(&rec, 3, "e")?,
            u: field(&rec, 4, "u")?,
            rule_count: field(&rec, 5, "rule_count")?,
            s_h: field(&rec, 6, "s_h")?,
            alpha1: field(&rec, 7, "alpha1")?,
            phi: field(&rec, 8, "phi")?,
            theta: field(&rec, 9, "theta")?,
        });
    }
    Ok(rows)
}

pub fn write_events<W: Write>(w: W, events: &[EvolutionEvent]) -> csv::Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(EVENTS_HEADER)?;
    for e in events {
        out.write_record([f(e.time), e.kind.as_str().to_string(), e.rule.to_string(), f(e.metric)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_events<R: Read>(r: R) -> Result<Vec<EvolutionEvent>, ReadError> {
    let mut rdr = ReaderBuilder::new().from_reader(r);
    check_header(rdr.headers()?, &EVENTS_HEADER)?;
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let kind: EventKind =
            rec.get(1).unwrap_or("").parse().map_err(|e: gctrl_core::error::Error| ReadError::Format(e.to_string()))?;
        events.push(EvolutionEvent {
            time: field(&rec, 0, "t")?,
            kind,
            rule: field(&rec, 2, "rule_idx")?,
            metric: field(&rec, 3, "metric")?,
        });
    }
    Ok(events)
}

pub fn write_telemetry<W: Write>(w: W, rows: &[TelemetryRow]) -> csv::Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(TELEMETRY_HEADER)?;
    for r in rows {
        out.write_record([
            f(r.t),
            f(r.s_h),
            f(r.alpha[0]),
            f(r.alpha[1]),
            f(r.alpha[2]),
            r.rule_count.to_string(),
            f(r.min_gain_eigenvalue),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per rule: center, upper triangle of the covariance, consequent
/// (bias first).
pub fn write_rules<W: Write>(w: W, rb: &RuleBase) -> csv::Result<()> {
    let n = rb.n_inputs();
    let mut header = vec!["rule".to_string()];
    header.extend((0..n).map(|i| format!("center_{i}")));
    for i in 0..n {
        header.extend((i..n).map(|j| format!("cov_{i}{j}")));
    }
    header.extend((0..=n).map(|i| format!("omega_{i}")));
    let mut out = Writer::from_writer(w);
    out.write_record(&header)?;
    for (k, rule) in rb.rules().iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(rule.center().iter().map(|&v| f(v)));
        let cov = rule.covariance();
        for i in 0..n {
            rec.extend((i..n).map(|j| f(cov[(i, j)])));
        }
        rec.extend(rule.consequent.iter().map(|&v| f(v)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// One metrics row as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub trajectory: String,
    pub controller: String,
    /// `ok`, or `failed` for a run that stopped early (metrics then cover the partial log).
    pub status: String,
    pub metrics: Metrics,
}

pub fn write_metrics<W: Write>(w: W, rows: &[MetricsRecord]) -> csv::Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        out.write_record([
            r.trajectory.clone(),
            r.controller.clone(),
            r.status.clone(),
            f(m.rmse),
            f(m.rmse_full),
            f(m.rise_time),
            f(m.settling_time),
            f(m.peak_overshoot),
            m.risen.to_string(),
            m.settled.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
