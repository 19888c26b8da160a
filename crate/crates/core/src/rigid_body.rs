//! 6-DOF rigid-body motion with quaternion attitude.
//!
//! Axes follow the usual aircraft convention: inertial x north, y east, z down;
//! body velocities (u, v, w) and rates (p, q, r) are right-handed about the
//! body axes. The xz plane is a plane of symmetry, so only `I_xz` couples the
//! roll and yaw rows.

use core::ops::{Add, Mul};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::math::{asin, atan2, cos, sin, sqrt};

/// Attitude quaternion, scalar first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { q0: 1.0, q1: 0.0, q2: 0.0, q3: 0.0 };

    pub fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn norm_squared(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    pub fn normalized(&self) -> Self {
        let n = sqrt(self.norm_squared());
        Self::new(self.q0 / n, self.q1 / n, self.q2 / n, self.q3 / n)
    }

    pub fn dot(&self, other: &[f64; 4]) -> f64 {
        self.q0 * other[0] + self.q1 * other[1] + self.q2 * other[2] + self.q3 * other[3]
    }

    /// Roll, pitch and yaw (rad). Pitch is limited to [-π/2, π/2].
    pub fn to_euler(&self) -> (f64, f64, f64) {
        let Quaternion { q0, q1, q2, q3 } = *self;
        let roll = atan2(2.0 * (q0 * q1 + q2 * q3), 1.0 - 2.0 * (q1 * q1 + q2 * q2));
        let pitch = asin(2.0 * (q0 * q2 - q3 * q1));
        let yaw = atan2(2.0 * (q0 * q3 + q1 * q2), 1.0 - 2.0 * (q2 * q2 + q3 * q3));
        (roll, pitch, yaw)
    }
}

/// Quaternion from roll φ, pitch θ and yaw ψ (z-y-x rotation order).
pub fn euler_to_quaternion(roll: f64, pitch: f64, yaw: f64) -> Quaternion {
    let (sr, cr) = (sin(0.5 * roll), cos(0.5 * roll));
    let (sp, cp) = (sin(0.5 * pitch), cos(0.5 * pitch));
    let (sy, cy) = (sin(0.5 * yaw), cos(0.5 * yaw));
    Quaternion {
        q0: cr * cp * cy + sr * sp * sy,
        q1: sr * cp * cy - cr * sp * sy,
        q2: cr * sp * cy + sr * cp * sy,
        q3: cr * cp * sy - sr * sp * cy,
    }
}

/// Attitude rate `q̇ = −½·Ω(p, q, r)·q`.
pub fn quaternion_derivative(att: &Quaternion, p: f64, q: f64, r: f64) -> [f64; 4] {
    let Quaternion { q0, q1, q2, q3 } = *att;
    [
        -0.5 * (p * q1 + q * q2 + r * q3),
        -0.5 * (-p * q0 - r * q2 + q * q3),
        -0.5 * (-q * q0 + r * q1 - p * q3),
        -0.5 * (-r * q0 - q * q1 + p * q2),
    ]
}

/// Body-to-inertial direction cosine matrix.
pub fn rotation_matrix(att: &Quaternion) -> Matrix3<f64> {
    let Quaternion { q0, q1, q2, q3 } = *att;
    Matrix3::new(
        q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3,
        2.0 * (q1 * q2 - q0 * q3),
        2.0 * (q1 * q3 + q0 * q2),
        2.0 * (q1 * q2 + q0 * q3),
        q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3,
        2.0 * (q2 * q3 - q0 * q1),
        2.0 * (q1 * q3 - q0 * q2),
        2.0 * (q2 * q3 + q0 * q1),
        q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaParams {
    /// Mass (kg).
    pub mass: f64,
    pub ix: f64,
    pub iy: f64,
    pub iz: f64,
    /// Product of inertia I_xz (kg·m²).
    pub ixz: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

impl Default for InertiaParams {
    fn default() -> Self {
        Self { mass: 3.0, ix: 0.04, iy: 0.04, iz: 0.06, ixz: 0.0, gravity: 9.81 }
    }
}

impl InertiaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::config("mass must be positive"));
        }
        if !(self.ix > 0.0 && self.iy > 0.0 && self.iz > 0.0) {
            return Err(Error::config("principal inertias must be positive"));
        }
        if !(self.ix * self.iz - self.ixz * self.ixz > 0.0) {
            return Err(Error::config("roll/yaw inertia coupling is singular"));
        }
        if !self.gravity.is_finite() {
            return Err(Error::config("gravity must be finite"));
        }
        Ok(())
    }
}

/// Body-axis forces (gravity included) and moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self { force: Vector3::zeros(), moment: Vector3::zeros() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    /// Inertial position (m), z down.
    pub position: Vector3<f64>,
    /// Body velocity (u, v, w) (m/s).
    pub velocity: Vector3<f64>,
    /// Body rates (p, q, r) (rad/s).
    pub rates: Vector3<f64>,
    pub attitude: Quaternion,
}

impl Default for RigidBodyState {
    fn default() -> Self {
        Self {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            rates: Vector3::zeros(),
            attitude: Quaternion::IDENTITY,
        }
    }
}

impl RigidBodyState {
    fn check_finite(&self) -> Result<()> {
        let fields: [(&'static str, bool); 4] = [
            ("position", self.position.iter().all(|v| v.is_finite())),
            ("body velocity", self.velocity.iter().all(|v| v.is_finite())),
            ("body rates", self.rates.iter().all(|v| v.is_finite())),
            ("attitude", self.attitude.as_array().iter().all(|v| v.is_finite())),
        ];
        match fields.iter().find(|(_, ok)| !ok) {
            Some((field, _)) => Err(Error::NumericalBlowup { field }),
            None => Ok(()),
        }
    }

    fn advanced(&self, rate: &StateRate, h: f64) -> Self {
        let mut att = self.attitude.as_array();
        for (a, d) in att.iter_mut().zip(rate.attitude.iter()) {
            *a += h * d;
        }
        Self {
            position: self.position + rate.position * h,
            velocity: self.velocity + rate.velocity * h,
            rates: self.rates + rate.rates * h,
            attitude: Quaternion::from_array(att),
        }
    }
}

/// Time derivative of [`RigidBodyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub rates: Vector3<f64>,
    pub attitude: [f64; 4],
}

impl Add for StateRate {
    type Output = StateRate;

    fn add(self, o: StateRate) -> StateRate {
        let mut att = self.attitude;
        for (a, b) in att.iter_mut().zip(o.attitude.iter()) {
            *a += b;
        }
        StateRate {
            position: self.position + o.position,
            velocity: self.velocity + o.velocity,
            rates: self.rates + o.rates,
            attitude: att,
        }
    }
}

impl Mul<f64> for StateRate {
    type Output = StateRate;

    fn mul(self, k: f64) -> StateRate {
        StateRate {
            position: self.position * k,
            velocity: self.velocity * k,
            rates: self.rates * k,
            attitude: self.attitude.map(|a| a * k),
        }
    }
}

/// Translational and rotational accelerations, attitude rate and inertial
/// velocity for the given state and wrench.
pub fn body_derivatives(s: &RigidBodyState, wrench: &Wrench, j: &InertiaParams) -> Result<StateRate> {
    let coupling = j.ix * j.iz - j.ixz * j.ixz;
    if !(coupling > 0.0) {
        return Err(Error::config("roll/yaw inertia coupling is singular"));
    }
    let (u, v, w) = (s.velocity.x, s.velocity.y, s.velocity.z);
    let (p, q, r) = (s.rates.x, s.rates.y, s.rates.z);
    let f = wrench.force / j.mass;

    let velocity = Vector3::new(f.x - q * w + r * v, f.y - r * u + p * w, f.z - p * v + q * u);

    // Roll and yaw rows are coupled through I_xz:
    //   I_x ṗ − I_xz ṙ = L − qr(I_z − I_y) + I_xz pq
    //  −I_xz ṗ + I_z ṙ = N − pq(I_y − I_x) − I_xz qr
    let roll_rhs = wrench.moment.x - q * r * (j.iz - j.iy) + j.ixz * p * q;
    let yaw_rhs = wrench.moment.z - p * q * (j.iy - j.ix) - j.ixz * q * r;
    let p_dot = (j.iz * roll_rhs + j.ixz * yaw_rhs) / coupling;
    let r_dot = (j.ixz * roll_rhs + j.ix * yaw_rhs) / coupling;
    let q_dot = (wrench.moment.y - r * p * (j.ix - j.iz) - j.ixz * (p * p - r * r)) / j.iy;

    Ok(StateRate {
        position: rotation_matrix(&s.attitude) * s.velocity,
        velocity,
        rates: Vector3::new(p_dot, q_dot, r_dot),
        attitude: quaternion_derivative(&s.attitude, p, q, r),
    })
}

/// One classical RK4 step with the wrench held constant; the quaternion is
/// renormalised afterwards.
pub fn step(s: &RigidBodyState, wrench: &Wrench, j: &InertiaParams, dt: f64) -> Result<RigidBodyState> {
    if !(dt > 0.0) {
        return Err(Error::Contract("integration step must be positive"));
    }
    let k1 = body_derivatives(s, wrench, j)?;
    let k2 = body_derivatives(&s.advanced(&k1, 0.5 * dt), wrench, j)?;
    let k3 = body_derivatives(&s.advanced(&k2, 0.5 * dt), wrench, j)?;
    let k4 = body_derivatives(&s.advanced(&k3, dt), wrench, j)?;
    let slope = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0);
    let mut next = s.advanced(&slope, dt);
    next.check_finite()?;
    next.attitude = next.attitude.normalized();
    next.check_finite()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_to_quaternion(0.0, 0.0, 0.0), Quaternion::IDENTITY);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let roll = euler_to_quaternion(FRAC_PI_2, 0.0, 0.0);
        assert!(close(roll.q0, h, 1e-15) && close(roll.q1, h, 1e-15));
        assert_eq!((roll.q2, roll.q3), (0.0, 0.0));
        let yaw = euler_to_quaternion(0.0, 0.0, FRAC_PI_2);
        assert!(close(yaw.q0, h, 1e-15) && close(yaw.q3, h, 1e-15));
        assert_eq!((yaw.q1, yaw.q2), (0.0, 0.0));
    }

    #[test]
    fn euler_round_trip() {
        let (r, p, y) = (0.3, -0.7, 2.1);
        let (r2, p2, y2) = euler_to_quaternion(r, p, y).to_euler();
        assert!(close(r, r2, 1e-12) && close(p, p2, 1e-12) && close(y, y2, 1e-12));
    }

    #[test]
    fn positive_roll_rate_raises_roll_angle() {
        let d = quaternion_derivative(&Quaternion::IDENTITY, 0.8, 0.0, 0.0);
        assert_eq!(d, [0.0, 0.4, 0.0, 0.0]);
        assert_eq!(quaternion_derivative(&euler_to_quaternion(0.2, 0.1, 0.4), 0.0, 0.0, 0.0), [0.0; 4]);
    }

    #[test]
    fn yaw_quarter_turn_maps_body_x_to_east() {
        let b = rotation_matrix(&euler_to_quaternion(0.0, 0.0, FRAC_PI_2));
        let east = b * Vector3::new(1.0, 0.0, 0.0);
        assert!((east - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert_eq!(rotation_matrix(&Quaternion::IDENTITY), Matrix3::identity());
    }

    #[test]
    fn rest_with_no_load_has_zero_rates() {
        let rate = body_derivatives(&RigidBodyState::default(), &Wrench::zero(), &InertiaParams::default()).unwrap();
        assert_eq!(rate.velocity, Vector3::zeros());
        assert_eq!(rate.rates, Vector3::zeros());
    }

    #[test]
    fn gyroscopic_roll_acceleration() {
        let j = InertiaParams::default();
        let mut s = RigidBodyState { rates: Vector3::new(0.0, 1.0, 0.0), ..RigidBodyState::default() };
        let rate = body_derivatives(&s, &Wrench::zero(), &j).unwrap();
        assert_eq!(rate.rates.x, 0.0);
        s.rates = Vector3::new(0.0, 1.0, 1.0);
        let rate = body_derivatives(&s, &Wrench::zero(), &j).unwrap();
        assert!(close(rate.rates.x, -0.5, 1e-12));
    }

    #[test]
    fn coriolis_on_surge() {
        let s = RigidBodyState {
            velocity: Vector3::new(0.0, 0.0, 1.0),
            rates: Vector3::new(0.0, 1.0, 0.0),
            ..RigidBodyState::default()
        };
        let rate = body_derivatives(&s, &Wrench::zero(), &InertiaParams::default()).unwrap();
        assert_eq!(rate.velocity.x, -1.0);
    }

    #[test]
    fn singular_inertia_is_rejected() {
        let j = InertiaParams { ixz: 0.05, ..InertiaParams::default() };
        assert!(body_derivatives(&RigidBodyState::default(), &Wrench::zero(), &j).is_err());
        assert!(j.validate().is_err());
    }

    #[test]
    fn blowup_names_the_field() {
        let mut w = Wrench::zero();
        w.force.z = f64::INFINITY;
        let err = step(&RigidBodyState::default(), &w, &InertiaParams::default(), 1e-3).unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { field } if field == "position" || field == "body velocity"));
    }

    #[test]
    fn non_positive_step_is_rejected() {
        let err = step(&RigidBodyState::default(), &Wrench::zero(), &InertiaParams::default(), 0.0);
        assert!(err.is_err());
    }
}
