//! Closed-loop runner: reference, altitude controller, attitude hold, mixer
//! and plant, one row per step.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::control::{attitude_hold, AttitudeGains, GController, GControllerConfig, Pid, PidGains};
use crate::error::{Error, Result};
use crate::evolution::EvolutionEvent;
use crate::fuzzy::RuleBase;
use crate::math::floor;
use crate::plant::{self, PlantConfig};
use crate::rigid_body::RigidBodyState;
use crate::trajectory::{reference, Trajectory};

/// Steps between two telemetry samples.
pub const TELEMETRY_INTERVAL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerChoice {
    Pid(PidGains),
    G(GControllerConfig),
}

impl ControllerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerChoice::Pid(_) => "pid",
            ControllerChoice::G(_) => "g",
        }
    }
}

/// Constant collective offset added by the altitude controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedforward {
    /// The collective that holds the vehicle in still-air hover.
    HoverTrim,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub plant: PlantConfig,
    pub controller: ControllerChoice,
    pub feedforward: Feedforward,
    pub attitude: AttitudeGains,
    pub yaw_setpoint: f64,
    pub trajectory: Trajectory,
    /// Simulated time (s); the step comes from the plant config.
    pub duration: f64,
    /// Initial altitude (m), vehicle at rest and level.
    pub initial_altitude: f64,
    /// Seed of the altitude sensor noise.
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.attitude.validate()?;
        self.trajectory.validate()?;
        match &self.controller {
            ControllerChoice::Pid(g) => g.validate()?,
            ControllerChoice::G(g) => g.validate()?,
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::config("duration must be non-negative"));
        }
        if self.trajectory.kind.is_periodic() && self.duration > 0.0 && self.duration * self.trajectory.frequency < 1.0
        {
            return Err(Error::config("periodic runs must cover at least one period"));
        }
        if !self.initial_altitude.is_finite() || !self.yaw_setpoint.is_finite() {
            return Err(Error::config("initial altitude and yaw setpoint must be finite"));
        }
        if let Feedforward::Fixed(v) = self.feedforward {
            if !v.is_finite() {
                return Err(Error::config("feedforward must be finite"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        floor(self.duration / self.plant.dt + 0.5) as usize
    }

    pub fn feedforward_value(&self) -> Result<f64> {
        match self.feedforward {
            Feedforward::HoverTrim => self.plant.hover_trim(),
            Feedforward::Fixed(v) => Ok(v),
        }
    }
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub z_ref: f64,
    pub z: f64,
    pub e: f64,
    pub u: f64,
    pub rule_count: usize,
    pub s_h: f64,
    pub alpha1: f64,
    pub phi: f64,
    pub theta: f64,
}

/// Adaptation state sampled every [`TELEMETRY_INTERVAL`] steps (G-controller only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub s_h: f64,
    pub alpha: [f64; 3],
    pub rule_count: usize,
    pub min_gain_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
    pub events: Vec<EvolutionEvent>,
    pub telemetry: Vec<TelemetryRow>,
    /// Final rule base of a G-controller run.
    pub rules: Option<RuleBase>,
    /// Set when the run stopped early; `rows` then holds everything up to the failure.
    pub failure: Option<Error>,
    pub gimbal_warnings: usize,
}

enum Controller {
    Pid(Pid),
    G(Box<GController>),
}

struct Tick {
    u: f64,
    rule_count: usize,
    s_h: f64,
    alpha1: f64,
}

impl Controller {
    fn step(&mut self, e: f64, dt: f64) -> Result<Tick> {
        match self {
            Controller::Pid(p) => {
                let out = p.step(e, dt)?;
                Ok(Tick { u: out.u, rule_count: 0, s_h: 0.0, alpha1: 0.0 })
            }
            Controller::G(g) => {
                let t = g.step(e, dt)?;
                Ok(Tick { u: t.u, rule_count: t.rule_count, s_h: t.s, alpha1: t.alpha[0] })
            }
        }
    }
}

fn build_controller(cfg: &RunConfig) -> Result<Controller> {
    let feedforward = cfg.feedforward_value()?;
    let (lo, hi) = (cfg.plant.pitch_min, cfg.plant.pitch_max);
    Ok(match cfg.controller {
        ControllerChoice::Pid(g) => {
            Controller::Pid(Pid::new(PidGains { output_min: lo, output_max: hi, ..g }, feedforward))
        }
        ControllerChoice::G(g) => Controller::G(Box::new(GController::new(GControllerConfig {
            feedforward,
            output_min: lo,
            output_max: hi,
            ..g
        })?)),
    })
}

/// Runs one closed-loop simulation.
///
/// Configuration problems are returned as errors; failures during the run
/// end it early and are reported in [`SimLog::failure`].
pub fn run_sim(cfg: &RunConfig) -> Result<SimLog> {
    cfg.validate()?;
    let dt = cfg.plant.dt;
    let mut controller = build_controller(cfg)?;
    let noise = if cfg.plant.altitude_noise_std > 0.0 {
        Some(Normal::new(0.0, cfg.plant.altitude_noise_std).map_err(|_| Error::config("invalid noise level"))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut state = RigidBodyState::default();
    state.position.z = -cfg.initial_altitude;
    let mut out = plant::outputs(&state);
    let mut log = SimLog::default();
    let steps = cfg.steps();
    log.rows.reserve(steps);

    for k in 0..steps {
        let t = k as f64 * dt;
        let z_ref = reference(&cfg.trajectory, t);
        let measured = out.altitude + noise.map_or(0.0, |n| n.sample(&mut rng));
        let e = z_ref - measured;

        let tick = match controller.step(e, dt) {
            Ok(tick) => tick,
            Err(err) => {
                log.failure = Some(Error::Tick { tick: k, source: Box::new(err) });
                break;
            }
        };
        let att = attitude_hold(&out, cfg.yaw_setpoint, &cfg.attitude);
        log.gimbal_warnings += usize::from(att.near_gimbal_lock);
        log.rows.push(LogRow {
            t,
            z_ref,
            z: out.altitude,
            e,
            u: tick.u,
            rule_count: tick.rule_count,
            s_h: tick.s_h,
            alpha1: tick.alpha1,
            phi: out.roll,
            theta: out.pitch,
        });
        if let Controller::G(g) = &controller {
            if k % TELEMETRY_INTERVAL == 0 {
                let sliding = g.sliding();
                log.telemetry.push(TelemetryRow {
                    t,
                    s_h: tick.s_h,
                    alpha: sliding.alpha(),
                    rule_count: tick.rule_count,
                    min_gain_eigenvalue: g.min_gain_eigenvalue().unwrap_or(0.0),
                });
            }
        }

        let cmd = plant::mix(tick.u, att.roll, att.pitch, att.yaw, &cfg.plant);
        match plant::plant_step(&state, &cmd, &cfg.plant) {
            Ok((next, next_out)) => {
                state = next;
                out = next_out;
            }
            Err(err) => {
                log.failure = Some(Error::Tick { tick: k, source: Box::new(err) });
                break;
            }
        }
    }

    if let Controller::G(g) = &mut controller {
        log.events = g.take_events();
        log.rules = Some(g.rules().clone());
    }
    Ok(log)
}
