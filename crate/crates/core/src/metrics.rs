//! Tracking metrics of a logged run.
//!
//! * Step-like references (constant, step): rise time is the 10 %→90 % traversal
//!   from the initial altitude to the final commanded level, settling time the
//!   first time after which `|z − z_ref|` stays within 2 % of that level for the
//!   rest of the run, and the RMSE covers the whole run.
//! * Periodic references: the same definitions applied to the initial approach,
//!   the window up to the first extremum of the reference. The RMSE covers
//!   the samples from the settling time on.

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::sim::LogRow;
use crate::trajectory::Trajectory;

/// Width of the settling band relative to the target level.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// RMSE over the metric window (m).
    pub rmse: f64,
    /// RMSE over every logged sample (m).
    pub rmse_full: f64,
    pub rise_time: f64,
    pub settling_time: f64,
    /// Largest excursion past the target level, as a fraction of the traversal.
    pub peak_overshoot: f64,
    /// False when the 90 % level was never reached; rise time is then the run length.
    pub risen: bool,
    /// False when the band was never held; settling time is then the end of the window.
    pub settled: bool,
}

fn rmse(rows: &[LogRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let sum: f64 = rows.iter().map(|r| (r.z_ref - r.z) * (r.z_ref - r.z)).sum();
    sqrt(sum / rows.len() as f64)
}

/// Time of the first sample at or past `level` in the direction `sign`.
fn first_crossing(rows: &[LogRow], level: f64, sign: f64) -> Option<f64> {
    rows.iter().find(|r| sign * (r.z - level) >= 0.0).map(|r| r.t)
}

/// Start of the final in-band stretch of `rows`, `None` if the last sample is outside.
fn settle(rows: &[LogRow], band: f64) -> Option<f64> {
    let outside = |r: &LogRow| (r.z - r.z_ref).abs() > band;
    match rows.iter().rposition(outside) {
        None => Some(rows.first().map_or(0.0, |r| r.t)),
        Some(i) if i + 1 < rows.len() => Some(rows[i + 1].t),
        Some(_) => None,
    }
}

pub fn metrics(rows: &[LogRow], traj: &Trajectory) -> Result<Metrics> {
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Contract("metrics need a non-empty log")),
    };
    let dt = if rows.len() > 1 { rows[1].t - rows[0].t } else { 0.0 };
    let end = last.t + dt;
    let z0 = first.z;

    let (target, window_end) = match traj.first_extremum() {
        Some((t_peak, value)) => (value, t_peak),
        None => (last.z_ref, end),
    };
    let travel = target - z0;
    let sign = if travel >= 0.0 { 1.0 } else { -1.0 };

    let (rise_time, risen) = if travel == 0.0 {
        (0.0, true)
    } else {
        match (first_crossing(rows, z0 + 0.1 * travel, sign), first_crossing(rows, z0 + 0.9 * travel, sign)) {
            (Some(t10), Some(t90)) => (t90 - t10, true),
            _ => (end, false),
        }
    };

    let window_len = rows.iter().take_while(|r| r.t <= window_end).count();
    let window = &rows[..window_len.max(1)];
    let band = SETTLING_BAND * target.abs();
    let (settling_time, settled) = match settle(window, band) {
        Some(t) => (t, true),
        None => (window_end.min(end), false),
    };

    let overshoot = rows.iter().map(|r| sign * (r.z - target)).fold(0.0, f64::max);
    let peak_overshoot = if travel == 0.0 { 0.0 } else { overshoot / travel.abs() };

    let rmse_full = rmse(rows);
    let rmse = if traj.kind.is_periodic() {
        let from = rows.iter().position(|r| r.t >= settling_time).unwrap_or(rows.len());
        self::rmse(&rows[from..])
    } else {
        rmse_full
    };
    Ok(Metrics { rmse, rmse_full, rise_time, settling_time, peak_overshoot, risen, settled })
}
