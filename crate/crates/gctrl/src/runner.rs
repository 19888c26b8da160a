//! Runs, comparisons and their files on disk.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::thread;

use gctrl_core::metrics::{metrics, Metrics};
use gctrl_core::sim::{run_sim, RunConfig, SimLog};

use crate::config::{self, FileConfig};
use crate::csvio::{self, MetricsRecord};
use crate::error::{AppError, Result};

/// Name of the resolved config written next to every log.
pub const CONFIG_FILE: &str = "config.cfg";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub log: SimLog,
    /// None when the log is empty (zero duration, or a failure on the first tick).
    pub metrics: Option<Metrics>,
}

impl RunOutcome {
    pub fn record(&self) -> Option<MetricsRecord> {
        Some(MetricsRecord {
            trajectory: self.config.trajectory.kind.as_str().to_string(),
            controller: self.config.controller.name().to_string(),
            status: if self.log.failure.is_some() { "failed" } else { "ok" }.to_string(),
            metrics: self.metrics?,
        })
    }
}

/// One simulation. Configuration errors are returned; a run that stops on a
/// numerical error still yields its partial log.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let log = run_sim(cfg)?;
    let metrics = if log.rows.is_empty() { None } else { Some(metrics(&log.rows, &cfg.trajectory)?) };
    Ok(RunOutcome { config: *cfg, log, metrics })
}

/// Runs every config concurrently. All runs must share trajectory and plant.
pub fn compare(cfgs: &[RunConfig]) -> Result<Vec<RunOutcome>> {
    let Some(first) = cfgs.first() else {
        return Err(AppError::Config("nothing to compare".into()));
    };
    if cfgs.iter().any(|c| c.trajectory != first.trajectory) {
        return Err(AppError::Config("compared runs must share one trajectory".into()));
    }
    if cfgs.iter().any(|c| c.plant != first.plant) {
        return Err(AppError::Config("compared runs must share one plant".into()));
    }
    for c in cfgs {
        c.validate()?;
    }
    thread::scope(|s| {
        let handles: Vec<_> = cfgs.iter().map(|c| s.spawn(move || execute(c))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

/// Writes log, events, telemetry, rules, metrics and the resolved config into `dir`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome, file_cfg: &FileConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let path = dir.join("log.csv");
    csvio::write_log(create(&path)?, &outcome.log.rows).map_err(|e| AppError::csv(&path, e))?;
    if matches!(outcome.config.controller, gctrl_core::sim::ControllerChoice::G(_)) {
        let path = dir.join("events.csv");
        csvio::write_events(create(&path)?, &outcome.log.events).map_err(|e| AppError::csv(&path, e))?;
        let path = dir.join("telemetry.csv");
        csvio::write_telemetry(create(&path)?, &outcome.log.telemetry).map_err(|e| AppError::csv(&path, e))?;
        if let Some(rb) = &outcome.log.rules {
            let path = dir.join("rules.csv");
            csvio::write_rules(create(&path)?, rb).map_err(|e| AppError::csv(&path, e))?;
        }
    }
    let path = dir.join("metrics.csv");
    let records: Vec<MetricsRecord> = outcome.record().into_iter().collect();
    csvio::write_metrics(create(&path)?, &records).map_err(|e| AppError::csv(&path, e))?;
    // The config that produced this log, so `metrics --log` can recover the reference.
    let mut resolved = *file_cfg;
    resolved.controller = match outcome.config.controller {
        gctrl_core::sim::ControllerChoice::Pid(_) => config::ControllerKind::Pid,
        gctrl_core::sim::ControllerChoice::G(_) => config::ControllerKind::G,
    };
    resolved.trajectory = outcome.config.trajectory;
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, config::render(&resolved)).map_err(|e| AppError::io(&path, e))?;
    Ok(())
}

/// Fixed-width table of metric rows. A `*` marks a settling time that never
/// held (reported as the end of the window).
pub fn render_table(rows: &[MetricsRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<10} {:<7} {:>9} {:>9} {:>10} {:>11} {:>10}",
        "trajectory", "controller", "status", "rmse", "rmse_full", "rise_time", "settling", "overshoot"
    );
    for r in rows {
        let m = &r.metrics;
        let rise = format!("{:.4}{}", m.rise_time, if m.risen { " " } else { "*" });
        let settle = format!("{:.4}{}", m.settling_time, if m.settled { " " } else { "*" });
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:<7} {:>9.4} {:>9.4} {:>10} {:>11} {:>9.2}%",
            r.trajectory,
            r.controller,
            r.status,
            m.rmse,
            m.rmse_full,
            rise,
            settle,
            100.0 * m.peak_overshoot
        );
    }
    out
}
