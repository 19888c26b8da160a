//! PID with conditional integration and a first-order filtered derivative.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on |∫e|.
    pub integrator_limit: f64,
    /// Output range (after feedforward).
    pub output_min: f64,
    pub output_max: f64,
    /// Derivative filter time constant (s); zero differentiates raw samples.
    pub derivative_tau: f64,
}

/// Pole placement on the linearised heave model `ḧ = b·δ − a·ḣ` of the default
/// plant (b ≈ 51.2 m/s² per rad, a ≈ 0.853 1/s) with a triple pole at −1 rad/s:
/// kp = 3p²/b, ki = p³/b, kd = (3p − a)/b.
impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.0586,
            ki: 0.0195,
            kd: 0.0419,
            integrator_limit: 10.0,
            output_min: 0.0,
            output_max: 0.35,
            derivative_tau: 0.02,
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        if [self.kp, self.ki, self.kd, self.derivative_tau].iter().any(|v| !v.is_finite()) {
            return Err(Error::config("PID gains must be finite"));
        }
        if !(self.integrator_limit > 0.0) {
            return Err(Error::config("PID integrator limit must be positive"));
        }
        if !(self.output_min < self.output_max) {
            return Err(Error::config("PID output limits must satisfy min < max"));
        }
        if !(self.derivative_tau >= 0.0) {
            return Err(Error::config("PID derivative filter must be non-negative"));
        }
        Ok(())
    }
}

/// Result of one PID evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub u: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pid {
    gains: PidGains,
    feedforward: f64,
    integral: f64,
    derivative: f64,
    last_error: Option<f64>,
}

/// First-order low-pass update of a finite-difference derivative. The first
/// sample has no history and reads as zero.
pub(crate) fn filtered_derivative(state: f64, last: Option<f64>, e: f64, dt: f64, tau: f64) -> f64 {
    match last {
        None => 0.0,
        Some(prev) => {
            let raw = (e - prev) / dt;
            state + dt / (tau + dt) * (raw - state)
        }
    }
}

impl Pid {
    pub fn new(gains: PidGains, feedforward: f64) -> Self {
        Self { gains, feedforward, integral: 0.0, derivative: 0.0, last_error: None }
    }

    pub fn gains(&self) -> &PidGains {
        &self.gains
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn derivative(&self) -> f64 {
        self.derivative
    }

    fn raw(&self, e: f64, integral: f64) -> f64 {
        let g = &self.gains;
        self.feedforward + g.kp * e + g.ki * integral + g.kd * self.derivative
    }

    /// `u = u_ff + K_p·e + K_i·∫e + K_d·ė`, saturated. The integrator only
    /// accepts the new sample when that does not leave the output saturated.
    pub fn step(&mut self, e: f64, dt: f64) -> Result<PidOutput> {
        if !(dt > 0.0) {
            return Err(Error::Contract("dt must be positive"));
        }
        if !e.is_finite() {
            return Err(Error::NumericalBlowup { field: "PID error" });
        }
        let g = self.gains;
        self.derivative = filtered_derivative(self.derivative, self.last_error, e, dt, g.derivative_tau);
        self.last_error = Some(e);

        let candidate = (self.integral + e * dt).clamp(-g.integrator_limit, g.integrator_limit);
        let trial = self.raw(e, candidate);
        if trial >= g.output_min && trial <= g.output_max {
            self.integral = candidate;
        }
        let raw = self.raw(e, self.integral);
        let u = raw.clamp(g.output_min, g.output_max);
        Ok(PidOutput { u, saturated: u != raw })
    }
}
