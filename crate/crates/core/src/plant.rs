//! Six pitch-controlled rotors on a regular hexagon around the rigid body.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::rigid_body::{self, InertiaParams, RigidBodyState, Wrench};
use crate::rotor::{self, RotorInflow, RotorOutput, RotorParams, SpinDirection};

pub const ROTOR_COUNT: usize = 6;

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

/// Unit arm directions, rotor 1 on +x, 60° apart counter-clockwise in the
/// body xy plane.
const ARM_DIRECTIONS: [(f64, f64); ROTOR_COUNT] =
    [(1.0, 0.0), (0.5, HALF_SQRT3), (-0.5, HALF_SQRT3), (-1.0, 0.0), (-0.5, -HALF_SQRT3), (0.5, -HALF_SQRT3)];

/// Where a rotor sits and how the mixer drives it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorStation {
    /// Hub position in body axes (m).
    pub position: Vector3<f64>,
    pub spin: SpinDirection,
    /// Mixer weight of the roll command (−y / arm length).
    pub roll_weight: f64,
    /// Mixer weight of the pitch command (x / arm length).
    pub pitch_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    pub inertia: InertiaParams,
    /// Rotor constants shared by all six rotors; spin is assigned per station.
    pub rotor: RotorParams,
    /// Rotor speed Ω (rad/s), held constant.
    pub rotor_speed: f64,
    /// Hub distance from the centre of gravity (m).
    pub arm_length: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Actuator range of each blade pitch (rad).
    pub pitch_min: f64,
    pub pitch_max: f64,
    /// Standard deviation of additive altitude sensor noise (m); zero disables it.
    pub altitude_noise_std: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            inertia: InertiaParams::default(),
            rotor: RotorParams::default(),
            rotor_speed: 600.0,
            arm_length: 0.35,
            dt: 1e-3,
            pitch_min: 0.0,
            pitch_max: 0.35,
            altitude_noise_std: 0.0,
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        self.inertia.validate()?;
        self.rotor.validate()?;
        if !(self.rotor_speed > 0.0 && self.rotor_speed.is_finite()) {
            return Err(Error::config("rotor speed must be positive"));
        }
        if !(self.arm_length > 0.0 && self.arm_length.is_finite()) {
            return Err(Error::config("arm length must be positive"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.pitch_min < self.pitch_max) {
            return Err(Error::config("pitch limits must satisfy min < max"));
        }
        if !(self.altitude_noise_std >= 0.0) {
            return Err(Error::config("altitude noise must be non-negative"));
        }
        Ok(())
    }

    /// Rotor stations with alternating spin, rotor 1 clockwise.
    pub fn stations(&self) -> [RotorStation; ROTOR_COUNT] {
        core::array::from_fn(|i| {
            let (cx, cy) = ARM_DIRECTIONS[i];
            RotorStation {
                position: Vector3::new(cx * self.arm_length, cy * self.arm_length, 0.0),
                spin: if i % 2 == 0 { SpinDirection::Cw } else { SpinDirection::Ccw },
                roll_weight: -cy,
                pitch_weight: cx,
            }
        })
    }

    fn rotor_params(&self, station: &RotorStation) -> RotorParams {
        RotorParams { spin: station.spin, ..self.rotor }
    }

    /// Common blade pitch that balances weight in still air.
    pub fn hover_trim(&self) -> Result<f64> {
        let per_rotor = self.inertia.mass * self.inertia.gravity / ROTOR_COUNT as f64;
        rotor::pitch_for_thrust(per_rotor, self.rotor_speed, &self.rotor, self.pitch_min, self.pitch_max)
    }

    pub fn saturate(&self, pitch: f64) -> f64 {
        pitch.clamp(self.pitch_min, self.pitch_max)
    }
}

/// Per-rotor blade pitch after mixing and saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCommand {
    pub pitch: [f64; ROTOR_COUNT],
    /// Set when at least one rotor hit an actuator limit.
    pub saturated: bool,
}

impl MixedCommand {
    pub fn uniform(pitch: f64, cfg: &PlantConfig) -> Self {
        mix(pitch, 0.0, 0.0, 0.0, cfg)
    }
}

/// Control mixing: collective plus roll, pitch and differential-yaw terms.
///
/// Positive roll, pitch and yaw commands produce positive body moments.
pub fn mix(collective: f64, roll: f64, pitch: f64, yaw: f64, cfg: &PlantConfig) -> MixedCommand {
    let mut saturated = false;
    let stations = cfg.stations();
    let pitches = core::array::from_fn(|i| {
        let st = &stations[i];
        let raw = collective + roll * st.roll_weight + pitch * st.pitch_weight + yaw * st.spin.sign();
        let clamped = cfg.saturate(raw);
        saturated |= clamped != raw;
        clamped
    });
    MixedCommand { pitch: pitches, saturated }
}

/// What the controllers see of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantOutputs {
    /// Height above the origin, −Z (m).
    pub altitude: f64,
    /// Vertical speed, −Ż (m/s).
    pub climb_rate: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Body rates (p, q, r) (rad/s).
    pub rates: Vector3<f64>,
}

pub fn outputs(state: &RigidBodyState) -> PlantOutputs {
    let (roll, pitch, yaw) = state.attitude.to_euler();
    let inertial_velocity = rigid_body::rotation_matrix(&state.attitude) * state.velocity;
    PlantOutputs { altitude: -state.position.z, climb_rate: -inertial_velocity.z, roll, pitch, yaw, rates: state.rates }
}

/// Local freestream at a rotor hub from body velocity and rotation.
pub fn station_inflow(state: &RigidBodyState, station: &RotorStation, speed: f64, pitch: f64) -> RotorInflow {
    let local = state.velocity + state.rates.cross(&station.position);
    // Air moves opposite to the hub; through-disc flow is positive along +z (down).
    let normal = -local.z;
    RotorInflow {
        normal,
        tangential: sqrt(local.x * local.x + local.y * local.y),
        climb: normal,
        speed,
        collective: pitch,
    }
}

/// Total body wrench of rotors and gravity.
pub fn wrench(
    state: &RigidBodyState,
    cmd: &MixedCommand,
    cfg: &PlantConfig,
) -> Result<(Wrench, [RotorOutput; ROTOR_COUNT])> {
    let b = rigid_body::rotation_matrix(&state.attitude);
    let weight = Vector3::new(0.0, 0.0, cfg.inertia.mass * cfg.inertia.gravity);
    let mut force = b.transpose() * weight;
    let mut moment = Vector3::zeros();
    let mut rotors = [RotorOutput { thrust: 0.0, induced_velocity: 0.0, torque: 0.0, power: 0.0 }; ROTOR_COUNT];
    for (i, station) in cfg.stations().iter().enumerate() {
        let inflow = station_inflow(state, station, cfg.rotor_speed, cmd.pitch[i]);
        let out = rotor::evaluate(&inflow, &cfg.rotor_params(station))?;
        let thrust = Vector3::new(0.0, 0.0, -out.thrust);
        force += thrust;
        moment += station.position.cross(&thrust);
        moment.z += out.torque;
        rotors[i] = out;
    }
    Ok((Wrench { force, moment }, rotors))
}

/// Advances the vehicle by one plant step.
pub fn plant_step(
    state: &RigidBodyState,
    cmd: &MixedCommand,
    cfg: &PlantConfig,
) -> Result<(RigidBodyState, PlantOutputs)> {
    let (w, _) = wrench(state, cmd, cfg)?;
    let next = rigid_body::step(state, &w, &cfg.inertia, cfg.dt)?;
    Ok((next, outputs(&next)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_collective() {
        let cfg = PlantConfig::default();
        let cmd = mix(0.2, 0.0, 0.0, 0.0, &cfg);
        assert_eq!(cmd.pitch, [0.2; 6]);
        assert!(!cmd.saturated);
    }

    #[test]
    fn yaw_is_differential_by_spin() {
        let cfg = PlantConfig::default();
        let cmd = mix(0.2, 0.0, 0.0, 0.01, &cfg);
        for (i, st) in cfg.stations().iter().enumerate() {
            let expected = match st.spin {
                SpinDirection::Cw => 0.2 + 0.01,
                SpinDirection::Ccw => 0.2 - 0.01,
            };
            assert_eq!(cmd.pitch[i], expected);
        }
    }

    #[test]
    fn collective_saturates() {
        let cfg = PlantConfig::default();
        let cmd = mix(0.5, 0.0, 0.0, 0.0, &cfg);
        assert_eq!(cmd.pitch, [0.35; 6]);
        assert!(cmd.saturated);
    }

    #[test]
    fn layout_is_a_regular_hexagon_with_alternating_spin() {
        let cfg = PlantConfig::default();
        let st = cfg.stations();
        for (i, s) in st.iter().enumerate() {
            assert!((s.position.norm() - 0.35).abs() < 1e-15);
            let next = &st[(i + 1) % 6];
            assert!((s.position - next.position).norm() - 0.35 < 1e-15);
            assert_ne!(s.spin, next.spin);
        }
        assert_eq!(st[0].position.x, 0.35);
    }

    #[test]
    fn hover_trim_is_inside_the_actuator_range() {
        let trim = PlantConfig::default().hover_trim().unwrap();
        assert!(trim > 0.0 && trim < 0.35, "{trim}");
    }

    #[test]
    fn positive_roll_and_pitch_commands_give_positive_moments() {
        let cfg = PlantConfig::default();
        let trim = cfg.hover_trim().unwrap();
        let s = RigidBodyState::default();
        let (w, _) = wrench(&s, &mix(trim, 0.01, 0.0, 0.0, &cfg), &cfg).unwrap();
        assert!(w.moment.x > 0.0 && w.moment.y.abs() < 1e-12);
        let (w, _) = wrench(&s, &mix(trim, 0.0, 0.01, 0.0, &cfg), &cfg).unwrap();
        assert!(w.moment.y > 0.0 && w.moment.x.abs() < 1e-12);
        let (w, _) = wrench(&s, &mix(trim, 0.0, 0.0, 0.01, &cfg), &cfg).unwrap();
        assert!(w.moment.z > 0.0);
    }
}
