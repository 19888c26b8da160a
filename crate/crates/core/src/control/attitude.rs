//! Fixed PD loop that keeps the airframe level while the altitude controller
//! works on the collective.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::floor;
use crate::plant::PlantOutputs;

/// Pitch angle beyond which the Euler angles are treated as unreliable (80°).
pub const GIMBAL_LOCK_LIMIT: f64 = 80.0 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisGains {
    /// Angle gain (command rad per rad).
    pub kp: f64,
    /// Rate damping (command rad per rad/s).
    pub kd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeGains {
    pub roll: AxisGains,
    pub pitch: AxisGains,
    pub yaw: AxisGains,
}

impl Default for AttitudeGains {
    fn default() -> Self {
        let level = AxisGains { kp: 0.15, kd: 0.024 };
        Self { roll: level, pitch: level, yaw: AxisGains { kp: 1.0, kd: 0.3 } }
    }
}

impl AttitudeGains {
    pub fn validate(&self) -> Result<()> {
        for g in [self.roll, self.pitch, self.yaw] {
            if !(g.kp >= 0.0 && g.kd >= 0.0 && g.kp.is_finite() && g.kd.is_finite()) {
                return Err(Error::config("attitude gains must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeCommand {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// |θ| is past [`GIMBAL_LOCK_LIMIT`].
    pub near_gimbal_lock: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let wrapped = a - 2.0 * PI * floor((a + PI) / (2.0 * PI));
    // Rounding can land on +π for inputs just below −π.
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// PD on roll, pitch and yaw towards (0, 0, `yaw_setpoint`).
pub fn attitude_hold(out: &PlantOutputs, yaw_setpoint: f64, gains: &AttitudeGains) -> AttitudeCommand {
    let yaw_error = wrap_angle(out.yaw - yaw_setpoint);
    AttitudeCommand {
        roll: -gains.roll.kp * out.roll - gains.roll.kd * out.rates.x,
        pitch: -gains.pitch.kp * out.pitch - gains.pitch.kd * out.rates.y,
        yaw: -gains.yaw.kp * yaw_error - gains.yaw.kd * out.rates.z,
        near_gimbal_lock: out.pitch.abs() > GIMBAL_LOCK_LIMIT,
    }
}
