//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Unknown and repeated keys are errors. Every key is optional; missing keys
//! keep the built-in defaults. [`render`] writes every key back out, and
//! parsing the result gives the same configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use gctrl_core::control::{AttitudeGains, GControllerConfig, PidGains};
use gctrl_core::evolution::{Contribution, VolumeExponent};
use gctrl_core::plant::PlantConfig;
use gctrl_core::sim::{ControllerChoice, Feedforward, RunConfig};
use gctrl_core::trajectory::{Trajectory, TrajectoryKind};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Pid,
    G,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Pid => "pid",
            ControllerKind::G => "g",
        }
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "pid" => Ok(ControllerKind::Pid),
            "g" => Ok(ControllerKind::G),
            other => Err(format!("unknown controller {other:?} (expected pid or g)")),
        }
    }
}

/// Everything a config file can set. Both controllers are always present so a
/// single file can drive a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FileConfig {
    pub controller: ControllerKind,
    pub pid: PidGains,
    pub g: GControllerConfig,
    pub plant: PlantConfig,
    pub attitude: AttitudeGains,
    pub trajectory: Trajectory,
    pub feedforward: Feedforward,
    pub yaw_setpoint: f64,
    pub duration: f64,
    pub initial_altitude: f64,
    pub seed: u64,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            controller: ControllerKind::G,
            pid: PidGains::default(),
            g: GControllerConfig::default(),
            plant: PlantConfig::default(),
            attitude: AttitudeGains::default(),
            trajectory: Trajectory::constant(1.0),
            feedforward: Feedforward::HoverTrim,
            yaw_setpoint: 0.0,
            duration: 60.0,
            initial_altitude: 0.0,
            seed: 0,
        }
    }
}

impl FileConfig {
    /// The run for the configured controller.
    pub fn run_config(&self) -> RunConfig {
        self.run_config_for(self.controller)
    }

    pub fn run_config_for(&self, kind: ControllerKind) -> RunConfig {
        let controller = match kind {
            ControllerKind::Pid => ControllerChoice::Pid(self.pid),
            ControllerKind::G => ControllerChoice::G(self.g),
        };
        RunConfig {
            plant: self.plant,
            controller,
            feedforward: self.feedforward,
            attitude: self.attitude,
            yaw_setpoint: self.yaw_setpoint,
            trajectory: self.trajectory,
            duration: self.duration,
            initial_altitude: self.initial_altitude,
            seed: self.seed,
        }
    }

    /// Checks both controllers, not just the selected one.
    pub fn validate(&self) -> Result<()> {
        self.run_config_for(ControllerKind::Pid).validate()?;
        self.run_config_for(ControllerKind::G).validate()?;
        Ok(())
    }
}

type Getter = fn(&FileConfig) -> String;
type Setter = fn(&mut FileConfig, &str) -> std::result::Result<(), String>;

struct Key {
    name: &'static str,
    section: &'static str,
    doc: &'static str,
    get: Getter,
    set: Setter,
}

fn fmt_f64(v: f64) -> String {
    // Debug prints the shortest string that parses back to the same bits.
    format!("{v:?}")
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got {v:?}"))?;
    if x.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(x)
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got {v:?}"))
}

macro_rules! float_key {
    ($section:literal, $name:literal, $doc:literal, $($field:tt)+) => {
        Key {
            name: $name,
            section: $section,
            doc: $doc,
            get: |c| fmt_f64(c.$($field)+),
            set: |c, v| {
                c.$($field)+ = parse_f64(v)?;
                Ok(())
            },
        }
    };
}

macro_rules! usize_key {
    ($section:literal, $name:literal, $doc:literal, $($field:tt)+) => {
        Key {
            name: $name,
            section: $section,
            doc: $doc,
            get: |c| c.$($field)+.to_string(),
            set: |c, v| {
                c.$($field)+ = parse_usize(v)?;
                Ok(())
            },
        }
    };
}

fn parse_trajectory(v: &str) -> std::result::Result<TrajectoryKind, String> {
    v.parse().map_err(|e: gctrl_core::error::Error| e.to_string())
}

const KEYS: &[Key] = &[
    Key {
        name: "controller",
        section: "run",
        doc: "pid | g",
        get: |c| c.controller.as_str().into(),
        set: |c, v| {
            c.controller = v.parse()?;
            Ok(())
        },
    },
    Key {
        name: "trajectory",
        section: "run",
        doc: "constant | step | sine | triangle | sawtooth",
        get: |c| c.trajectory.kind.as_str().into(),
        set: |c, v| {
            c.trajectory.kind = parse_trajectory(v)?;
            Ok(())
        },
    },
    float_key!("run", "amplitude", "m", trajectory.amplitude),
    float_key!("run", "frequency", "Hz, periodic references", trajectory.frequency),
    float_key!("run", "step_time", "s, time of the second step", trajectory.step_time),
    float_key!("run", "duration", "s", duration),
    float_key!("run", "initial_altitude", "m", initial_altitude),
    float_key!("run", "yaw_setpoint", "rad", yaw_setpoint),
    Key {
        name: "feedforward",
        section: "run",
        doc: "trim (hover collective) or a collective in rad; 0 for a cold start",
        get: |c| match c.feedforward {
            Feedforward::HoverTrim => "trim".into(),
            Feedforward::Fixed(v) => fmt_f64(v),
        },
        set: |c, v| {
            c.feedforward = if v == "trim" { Feedforward::HoverTrim } else { Feedforward::Fixed(parse_f64(v)?) };
            Ok(())
        },
    },
    Key {
        name: "seed",
        section: "run",
        doc: "altitude noise seed",
        get: |c| c.seed.to_string(),
        set: |c, v| {
            c.seed = v.parse().map_err(|_| format!("expected a non-negative integer, got {v:?}"))?;
            Ok(())
        },
    },
    float_key!("plant", "dt", "s, integration and control step", plant.dt),
    float_key!("plant", "altitude_noise_std", "m, 0 disables sensor noise", plant.altitude_noise_std),
    float_key!("plant", "mass", "kg", plant.inertia.mass),
    float_key!("plant", "gravity", "m/s^2", plant.inertia.gravity),
    float_key!("plant", "ix", "kg m^2", plant.inertia.ix),
    float_key!("plant", "iy", "kg m^2", plant.inertia.iy),
    float_key!("plant", "iz", "kg m^2", plant.inertia.iz),
    float_key!("plant", "ixz", "kg m^2", plant.inertia.ixz),
    float_key!("plant", "rotor_speed", "rad/s", plant.rotor_speed),
    float_key!("plant", "arm_length", "m", plant.arm_length),
    float_key!("plant", "pitch_min", "rad, also the altitude controller's lower limit", plant.pitch_min),
    float_key!("plant", "pitch_max", "rad, also the altitude controller's upper limit", plant.pitch_max),
    float_key!("plant", "blade_radius", "m", plant.rotor.blade_radius),
    float_key!("plant", "solidity", "blade area is solidity * pi * radius^2", plant.rotor.solidity),
    float_key!("plant", "lift_slope", "1/rad", plant.rotor.lift_slope),
    float_key!("plant", "profile_drag", "", plant.rotor.profile_drag),
    float_key!("plant", "induced_correction", "", plant.rotor.induced_correction),
    float_key!("plant", "forward_correction", "", plant.rotor.forward_correction),
    float_key!("plant", "air_density", "kg/m^3", plant.rotor.air_density),
    float_key!("attitude", "roll_kp", "", attitude.roll.kp),
    float_key!("attitude", "roll_kd", "s", attitude.roll.kd),
    float_key!("attitude", "pitch_kp", "", attitude.pitch.kp),
    float_key!("attitude", "pitch_kd", "s", attitude.pitch.kd),
    float_key!("attitude", "yaw_kp", "", attitude.yaw.kp),
    float_key!("attitude", "yaw_kd", "s", attitude.yaw.kd),
    float_key!("pid", "pid_kp", "rad/m", pid.kp),
    float_key!("pid", "pid_ki", "rad/(m s)", pid.ki),
    float_key!("pid", "pid_kd", "rad s/m", pid.kd),
    float_key!("pid", "pid_integrator_limit", "m s", pid.integrator_limit),
    float_key!("pid", "pid_derivative_tau", "s", pid.derivative_tau),
    float_key!("g", "g_input_gain_error", "", g.input_gains[0]),
    float_key!("g", "g_input_gain_rate", "s", g.input_gains[1]),
    float_key!("g", "g_derivative_tau", "s", g.derivative_tau),
    float_key!("g", "g_rate_limit", "m/s", g.rate_limit),
    float_key!("g", "g_output_gain", "", g.output_gain),
    float_key!("g", "g_alpha1_init", "", g.smc.alpha_init[0]),
    float_key!("g", "g_alpha2_init", "", g.smc.alpha_init[1]),
    float_key!("g", "g_alpha3_init", "", g.smc.alpha_init[2]),
    float_key!("g", "g_gamma1", "", g.smc.gamma[0]),
    float_key!("g", "g_gamma2", "", g.smc.gamma[1]),
    float_key!("g", "g_gamma3", "", g.smc.gamma[2]),
    float_key!("g", "g_alpha1_max", "", g.smc.alpha_max[0]),
    float_key!("g", "g_alpha2_max", "", g.smc.alpha_max[1]),
    float_key!("g", "g_alpha3_max", "", g.smc.alpha_max[2]),
    float_key!("g", "g_robust_gain", "rad", g.smc.robust_gain),
    float_key!("g", "g_boundary_layer", "", g.smc.boundary_layer),
    float_key!("g", "g_initial_gain", "", g.smc.initial_gain),
    float_key!("g", "g_integral_limit", "m s, inf disables", g.smc.integral_limit),
    float_key!("g", "growth_threshold", "", g.evolution.growth_threshold),
    float_key!("g", "prune_delta", "pruning threshold is 0.1 * delta", g.evolution.prune_delta),
    float_key!("g", "winner_rate", "", g.evolution.winner_rate),
    float_key!("g", "log_det_clip", "", g.evolution.log_det_clip),
    float_key!("g", "overlap_factor", "", g.evolution.overlap_factor),
    float_key!("g", "initial_width", "", g.evolution.initial_width),
    float_key!("g", "min_width", "", g.evolution.min_width),
    usize_key!("g", "min_rules", "", g.evolution.min_rules),
    usize_key!("g", "usage_window", "samples", g.evolution.usage_window),
    Key {
        name: "volume_exponent",
        section: "g",
        doc: "dimension | inverse-dimension",
        get: |c| match c.g.evolution.volume_exponent {
            VolumeExponent::Dimension => "dimension".into(),
            VolumeExponent::InverseDimension => "inverse-dimension".into(),
        },
        set: |c, v| {
            c.g.evolution.volume_exponent = match v {
                "dimension" => VolumeExponent::Dimension,
                "inverse-dimension" => VolumeExponent::InverseDimension,
                other => return Err(format!("unknown volume exponent {other:?}")),
            };
            Ok(())
        },
    },
    Key {
        name: "contribution",
        section: "g",
        doc: "firing | volume",
        get: |c| match c.g.evolution.contribution {
            Contribution::AverageFiring => "firing".into(),
            Contribution::VolumeOnly => "volume".into(),
        },
        set: |c, v| {
            c.g.evolution.contribution = match v {
                "firing" => Contribution::AverageFiring,
                "volume" => Contribution::VolumeOnly,
                other => return Err(format!("unknown contribution {other:?}")),
            };
            Ok(())
        },
    },
];

/// Parses a config file's text. `origin` names the source in error messages.
pub fn parse(text: &str, origin: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    let mut seen = vec![false; KEYS.len()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| AppError::ConfigLine { path: origin.to_string(), line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(format!("expected key = value, got {content:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(idx) = KEYS.iter().position(|k| k.name == key) else {
            return Err(err(format!("unknown key {key:?}")));
        };
        if seen[idx] {
            return Err(err(format!("key {key:?} given twice")));
        }
        seen[idx] = true;
        (KEYS[idx].set)(&mut cfg, value).map_err(|m| err(format!("{key}: {m}")))?;
    }
    let rotor = &mut cfg.plant.rotor;
    rotor.blade_area = rotor.solidity * rotor.disc_area();
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

/// Every key with its current value, grouped by section.
pub fn render(cfg: &FileConfig) -> String {
    let mut out = String::new();
    let mut section = "";
    for key in KEYS {
        if key.section != section {
            if !section.is_empty() {
                out.push('\n');
            }
            section = key.section;
            let _ = writeln!(out, "# {section}");
        }
        let value = (key.get)(cfg);
        if key.doc.is_empty() {
            let _ = writeln!(out, "{} = {}", key.name, value);
        } else {
            let _ = writeln!(out, "{} = {}  # {}", key.name, value, key.doc);
        }
    }
    out
}
