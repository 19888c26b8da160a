//! Rotor aerodynamics for a pitch-controlled rotor at fixed speed.
//!
//! Thrust follows the closed-form blade-element result
//!
//! ```text
//! T = ρ·a·(ΩR)²·A_b/2 · [ (θ₀/3)(1 + 3μ²/2) − λ′/2 ]
//! λ′ = (V_i + V_n)/(ΩR),   μ = V_t/(ΩR)
//! ```
//!
//! and the induced velocity is the modified momentum relation
//!
//! ```text
//! V_i² = √((V̂²/2)² + (T/2ρA)²) − V̂²/2
//! ```
//!
//! with `V̂` the freestream speed seen by the disc. Thrust and induced velocity
//! are coupled, so [`rotor_thrust`] solves them jointly.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Iteration cap of the coupled thrust / induced-velocity solve.
pub const MAX_ITERATIONS: usize = 500;
/// Convergence tolerance on the induced velocity (m/s).
pub const TOLERANCE: f64 = 1e-9;
/// Relaxation factor of the damped fixed-point update.
pub const RELAXATION: f64 = 0.5;

/// Rotation sense of a rotor.
///
/// The sign is the sense of the reaction torque the rotor puts on the airframe
/// about body z (z down): `Cw` rotors push the airframe towards positive yaw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinDirection {
    Cw,
    Ccw,
}

impl SpinDirection {
    pub fn sign(self) -> f64 {
        match self {
            SpinDirection::Cw => 1.0,
            SpinDirection::Ccw => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            SpinDirection::Cw => SpinDirection::Ccw,
            SpinDirection::Ccw => SpinDirection::Cw,
        }
    }
}

/// Physical constants of one rotor.
///
/// The disc area is derived from the blade radius, so `A = π·R_b²` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams {
    /// Blade radius R_b (m).
    pub blade_radius: f64,
    /// Total blade area A_b (m²).
    pub blade_area: f64,
    /// Lift-curve slope a (1/rad).
    pub lift_slope: f64,
    /// Solidity σ.
    pub solidity: f64,
    /// Profile drag coefficient C_D0.
    pub profile_drag: f64,
    /// Induced power correction k_ind.
    pub induced_correction: f64,
    /// Forward-flight profile power correction κ.
    pub forward_correction: f64,
    /// Air density ρ (kg/m³).
    pub air_density: f64,
    pub spin: SpinDirection,
}

impl Default for RotorParams {
    fn default() -> Self {
        let blade_radius = 0.15;
        let solidity = 0.05;
        Self {
            blade_radius,
            blade_area: solidity * (PI * blade_radius * blade_radius),
            lift_slope: 5.7,
            solidity,
            profile_drag: 0.011,
            induced_correction: 1.15,
            forward_correction: 4.6,
            air_density: 1.225,
            spin: SpinDirection::Cw,
        }
    }
}

impl RotorParams {
    /// Disc area A = π·R_b² (m²).
    pub fn disc_area(&self) -> f64 {
        PI * self.blade_radius * self.blade_radius
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.blade_radius,
            self.blade_area,
            self.lift_slope,
            self.solidity,
            self.profile_drag,
            self.induced_correction,
            self.forward_correction,
            self.air_density,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("rotor parameters must be finite"));
        }
        if self.blade_radius <= 0.0 {
            return Err(Error::config("blade radius must be positive"));
        }
        if !(self.solidity > 0.0 && self.solidity < 1.0) {
            return Err(Error::config("solidity must lie in (0, 1)"));
        }
        if self.air_density <= 0.0 {
            return Err(Error::config("air density must be positive"));
        }
        if self.lift_slope <= 0.0 {
            return Err(Error::config("lift slope must be positive"));
        }
        if self.blade_area <= 0.0 {
            return Err(Error::config("blade area must be positive"));
        }
        Ok(())
    }
}

/// Flow conditions and controls at one rotor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorInflow {
    /// Freestream component through the disc, positive in the thrust-opposing
    /// (downwash) direction (m/s).
    pub normal: f64,
    /// Freestream component in the disc plane (m/s).
    pub tangential: f64,
    /// Climb speed of the rotor (m/s).
    pub climb: f64,
    /// Rotor speed Ω (rad/s).
    pub speed: f64,
    /// Collective blade pitch θ₀ (rad).
    pub collective: f64,
}

/// Converged thrust and induced velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustSolution {
    pub thrust: f64,
    pub induced_velocity: f64,
    pub iterations: usize,
}

impl ThrustSolution {
    /// Negative thrust means the blade is operating in a stall-like region
    /// (fast climb at low pitch). It is reported, not clamped.
    pub fn is_negative(&self) -> bool {
        self.thrust < 0.0
    }
}

/// Everything a rotor contributes to the airframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorOutput {
    pub thrust: f64,
    pub induced_velocity: f64,
    /// Reaction torque about body z, signed by spin direction (N·m).
    pub torque: f64,
    pub power: f64,
}

/// Mean induced velocity for a given thrust.
///
/// Evaluated in the cancellation-free form `V_i² = c² / (√(h² + c²) + h)` with
/// `c = T/(2ρA)` and `h = V̂²/2`.
pub fn induced_velocity(thrust: f64, inflow: &RotorInflow, params: &RotorParams) -> Result<f64> {
    if !thrust.is_finite() || thrust < 0.0 {
        return Err(Error::Contract("induced velocity needs a finite, non-negative thrust"));
    }
    if thrust == 0.0 {
        return Ok(0.0);
    }
    let c = thrust / (2.0 * params.air_density * params.disc_area());
    let half_sq = 0.5 * (inflow.tangential * inflow.tangential + inflow.normal * inflow.normal);
    let vi_sq = c * c / (sqrt(half_sq * half_sq + c * c) + half_sq);
    Ok(sqrt(vi_sq))
}

/// Thrust coefficient ρ·a·(ΩR)²·A_b/2 (N).
fn thrust_scale(inflow: &RotorInflow, params: &RotorParams) -> f64 {
    let tip_speed = inflow.speed * params.blade_radius;
    0.5 * params.air_density * params.lift_slope * tip_speed * tip_speed * params.blade_area
}

/// Blade-element thrust for a given induced velocity.
pub fn blade_element_thrust(induced: f64, inflow: &RotorInflow, params: &RotorParams) -> f64 {
    let tip_speed = inflow.speed * params.blade_radius;
    let mu = inflow.tangential / tip_speed;
    let lambda = (induced + inflow.normal) / tip_speed;
    thrust_scale(inflow, params) * (inflow.collective / 3.0 * (1.0 + 1.5 * mu * mu) - 0.5 * lambda)
}

/// Solves thrust and induced velocity together.
///
/// The unknown is the induced velocity. Its update map
/// `V ↦ V_i(max(T(V), 0))` is non-increasing, so the root is bracketed by
/// `[0, V_i(T(0))]`. The solve takes damped fixed-point steps and falls back
/// to bisection whenever a step would leave the bracket or fails to halve the
/// residual.
pub fn rotor_thrust(inflow: &RotorInflow, params: &RotorParams) -> Result<ThrustSolution> {
    if !(inflow.speed > 0.0) {
        return Err(Error::Contract("rotor speed must be positive"));
    }
    if !(inflow.collective.is_finite() && inflow.normal.is_finite() && inflow.tangential.is_finite()) {
        return Err(Error::NumericalBlowup { field: "rotor inflow" });
    }
    let update = |v: f64| -> Result<f64> {
        let thrust = blade_element_thrust(v, inflow, params);
        induced_velocity(thrust.max(0.0), inflow, params)
    };

    let mut hi = update(0.0)?;
    if hi == 0.0 {
        return Ok(ThrustSolution {
            thrust: blade_element_thrust(0.0, inflow, params),
            induced_velocity: 0.0,
            iterations: 0,
        });
    }
    let mut lo = 0.0;
    let mut v = hi;
    let mut last_residual = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let next = update(v)?;
        let residual = v - next;
        if residual.abs() < TOLERANCE {
            return Ok(ThrustSolution {
                thrust: blade_element_thrust(next, inflow, params),
                induced_velocity: next,
                iterations: iteration,
            });
        }
        if residual < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let candidate = v + RELAXATION * (next - v);
        let contracting = residual.abs() < 0.5 * last_residual;
        last_residual = residual.abs();
        v = if contracting && candidate > lo && candidate < hi { candidate } else { 0.5 * (lo + hi) };
    }
    Err(Error::Divergence { what: "rotor thrust / induced velocity", iterations: MAX_ITERATIONS, last: v })
}

/// Yaw reaction torque and shaft power.
///
/// ```text
/// P_ind = k_ind·T·V_i + T·V_c
/// P₀    = (σ·C_D0/8)·ρ·A·(ΩR)³·(1 + κμ²)
/// N_q   = ±(P_ind + P₀)/Ω
/// ```
pub fn rotor_torque_power(thrust: f64, induced: f64, inflow: &RotorInflow, params: &RotorParams) -> Result<(f64, f64)> {
    if inflow.speed == 0.0 {
        return Err(Error::DivisionByZero("rotor torque (Ω = 0)"));
    }
    let tip_speed = inflow.speed * params.blade_radius;
    let mu = inflow.tangential / tip_speed;
    let induced_power = params.induced_correction * thrust * induced + thrust * inflow.climb;
    let profile_power = params.solidity * params.profile_drag / 8.0
        * params.air_density
        * params.disc_area()
        * tip_speed
        * tip_speed
        * tip_speed
        * (1.0 + params.forward_correction * mu * mu);
    let power = induced_power + profile_power;
    Ok((params.spin.sign() * power / inflow.speed, power))
}

/// Full evaluation of one rotor.
pub fn evaluate(inflow: &RotorInflow, params: &RotorParams) -> Result<RotorOutput> {
    let solution = rotor_thrust(inflow, params)?;
    let (torque, power) = rotor_torque_power(solution.thrust, solution.induced_velocity, inflow, params)?;
    Ok(RotorOutput { thrust: solution.thrust, induced_velocity: solution.induced_velocity, torque, power })
}

/// Collective pitch at which the rotor produces `target` newtons in still air.
///
/// Bisection over `[lo, hi]`; thrust is monotone in pitch there.
pub fn pitch_for_thrust(target: f64, speed: f64, params: &RotorParams, lo: f64, hi: f64) -> Result<f64> {
    let thrust_at = |collective: f64| -> Result<f64> {
        let inflow = RotorInflow { speed, collective, ..RotorInflow::default() };
        Ok(rotor_thrust(&inflow, params)?.thrust)
    };
    let (mut a, mut b) = (lo, hi);
    if thrust_at(a)? > target || thrust_at(b)? < target {
        return Err(Error::config("requested thrust is outside the pitch range"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if thrust_at(mid)? < target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
