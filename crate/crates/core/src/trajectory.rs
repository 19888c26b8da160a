//! Altitude references.

use core::f64::consts::PI;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{floor, sin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Constant,
    /// Two equal steps, at t = 0 and at the configured step time.
    Step,
    Sine,
    /// Zero at t = 0, peaks at a quarter period, like the sine.
    Triangle,
    /// Ramps from zero to the amplitude over half a period, drops to minus the
    /// amplitude and ramps back to zero.
    Sawtooth,
}

impl TrajectoryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryKind::Constant => "constant",
            TrajectoryKind::Step => "step",
            TrajectoryKind::Sine => "sine",
            TrajectoryKind::Triangle => "triangle",
            TrajectoryKind::Sawtooth => "sawtooth",
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, TrajectoryKind::Sine | TrajectoryKind::Triangle | TrajectoryKind::Sawtooth)
    }
}

impl FromStr for TrajectoryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(TrajectoryKind::Constant),
            "step" => Ok(TrajectoryKind::Step),
            "sine" => Ok(TrajectoryKind::Sine),
            "triangle" => Ok(TrajectoryKind::Triangle),
            "sawtooth" => Ok(TrajectoryKind::Sawtooth),
            other => Err(Error::config(alloc::format!("unknown trajectory kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    /// Peak altitude (m).
    pub amplitude: f64,
    /// Frequency of periodic kinds (Hz).
    pub frequency: f64,
    /// Time of the second step (s).
    pub step_time: f64,
}

impl Trajectory {
    pub fn constant(amplitude: f64) -> Self {
        Self { kind: TrajectoryKind::Constant, amplitude, frequency: 0.1, step_time: 5.0 }
    }

    pub fn step(amplitude: f64, step_time: f64) -> Self {
        Self { kind: TrajectoryKind::Step, amplitude, frequency: 0.1, step_time }
    }

    pub fn periodic(kind: TrajectoryKind, amplitude: f64, frequency: f64) -> Self {
        Self { kind, amplitude, frequency, step_time: 5.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config("trajectory amplitude must be positive"));
        }
        if self.kind.is_periodic() && !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::config("trajectory frequency must be positive"));
        }
        if self.kind == TrajectoryKind::Step && !(self.step_time > 0.0 && self.step_time.is_finite()) {
            return Err(Error::config("step time must be positive"));
        }
        Ok(())
    }

    /// Time and value of the first extremum of a periodic reference.
    pub fn first_extremum(&self) -> Option<(f64, f64)> {
        let period = 1.0 / self.frequency;
        match self.kind {
            TrajectoryKind::Sine | TrajectoryKind::Triangle => Some((0.25 * period, self.amplitude)),
            TrajectoryKind::Sawtooth => Some((0.5 * period, self.amplitude)),
            TrajectoryKind::Constant | TrajectoryKind::Step => None,
        }
    }
}

fn unit_step(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Reference altitude at time `t`.
pub fn reference(traj: &Trajectory, t: f64) -> f64 {
    let a = traj.amplitude;
    let phase = |t: f64| {
        let c = traj.frequency * t;
        c - floor(c)
    };
    match traj.kind {
        TrajectoryKind::Constant => a,
        TrajectoryKind::Step => 0.5 * a * (unit_step(t) + unit_step(t - traj.step_time)),
        TrajectoryKind::Sine => a * sin(2.0 * PI * traj.frequency * t),
        TrajectoryKind::Triangle => {
            let p = phase(t);
            let unit = if p < 0.25 {
                4.0 * p
            } else if p < 0.75 {
                2.0 - 4.0 * p
            } else {
                4.0 * p - 4.0
            };
            a * unit
        }
        TrajectoryKind::Sawtooth => {
            let p = phase(t);
            let unit = if p < 0.5 { 2.0 * p } else { 2.0 * p - 2.0 };
            a * unit
        }
    }
}
