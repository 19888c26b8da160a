//! The evolving G-controller.
//!
//! Each tick takes only the tracking error and the step length. Internally
//! the laws work on `x = −e` (output minus reference) so that a positive
//! sliding value means "too high" and every adaptation pushes the command
//! down.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::control::pid::filtered_derivative;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, EvolutionEvent, Evolver, StructureChange};
use crate::fuzzy::{self, RuleBase};
use crate::smc::{self, SlidingState, SmcConfig};

/// Controller inputs are `(x, ẋ)` scaled by these gains.
pub const N_INPUTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GControllerConfig {
    pub evolution: EvolutionConfig,
    pub smc: SmcConfig,
    /// Scaling of (error, error rate) into the rule input space.
    pub input_gains: [f64; N_INPUTS],
    /// Error-rate filter time constant (s).
    pub derivative_tau: f64,
    /// Bound on the filtered error rate (m/s); keeps reference jumps from
    /// blowing up the sliding value.
    pub rate_limit: f64,
    /// Gain from the fuzzy output to the command.
    pub output_gain: f64,
    /// Constant command offset; zero for a cold start.
    pub feedforward: f64,
    pub output_min: f64,
    pub output_max: f64,
}

/// Closed-loop tuning for the default plant. The adaptation rates, initial gain
/// and robust gain are far above the component defaults in [`SmcConfig`]; with
/// those the consequents barely move within a minute of flight.
impl Default for GControllerConfig {
    fn default() -> Self {
        Self {
            evolution: EvolutionConfig::default(),
            smc: SmcConfig { gamma: [1.0, 0.3, 1e-7], robust_gain: 0.1, initial_gain: 0.5, ..SmcConfig::default() },
            input_gains: [1.0, 0.5],
            derivative_tau: 0.02,
            rate_limit: 5.0,
            output_gain: 1.0,
            feedforward: 0.0,
            output_min: 0.0,
            output_max: 0.35,
        }
    }
}

impl GControllerConfig {
    pub fn validate(&self) -> Result<()> {
        self.evolution.validate()?;
        self.smc.validate()?;
        if self.input_gains.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::config("input gains must be positive"));
        }
        if !(self.derivative_tau >= 0.0) {
            return Err(Error::config("derivative filter must be non-negative"));
        }
        if !(self.rate_limit > 0.0) {
            return Err(Error::config("rate limit must be positive"));
        }
        if !self.output_gain.is_finite() || !self.feedforward.is_finite() {
            return Err(Error::config("output gain and feedforward must be finite"));
        }
        if !(self.output_min < self.output_max) {
            return Err(Error::config("output limits must satisfy min < max"));
        }
        Ok(())
    }
}

/// Diagnostics of one G-controller tick.
#[derive(Debug, Clone, PartialEq)]
pub struct GTick {
    pub u: f64,
    pub saturated: bool,
    /// Sliding value (in the `x = −e` coordinate).
    pub s: f64,
    pub fuzzy_output: f64,
    pub robust_term: f64,
    /// Filtered error rate de/dt.
    pub e_dot: f64,
    pub rule_count: usize,
    pub alpha: [f64; 3],
    pub change: StructureChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GController {
    cfg: GControllerConfig,
    rules: RuleBase,
    evolver: Evolver,
    sliding: SlidingState,
    x_dot: f64,
    last_x: Option<f64>,
    ticks: u64,
}

impl GController {
    /// Controller with an empty rule base.
    pub fn new(cfg: GControllerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            rules: RuleBase::new(N_INPUTS),
            evolver: Evolver::new(cfg.evolution),
            sliding: SlidingState::new(cfg.smc),
            x_dot: 0.0,
            last_x: None,
            ticks: 0,
        })
    }

    pub fn config(&self) -> &GControllerConfig {
        &self.cfg
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn sliding(&self) -> &SlidingState {
        &self.sliding
    }

    pub fn events(&self) -> &[EvolutionEvent] {
        self.evolver.events()
    }

    pub fn take_events(&mut self) -> Vec<EvolutionEvent> {
        self.evolver.take_events()
    }

    pub fn min_gain_eigenvalue(&self) -> Option<f64> {
        smc::min_gain_eigenvalue(&self.sliding)
    }

    /// One control tick.
    ///
    /// Filters the error rate, updates the error statistics and the rule
    /// structure (grow, or move the winner and prune), infers, evaluates the
    /// sliding value, adapts consequents, gain and sliding parameters, and
    /// returns feedforward + gain·ŷ + robustifying term, saturated.
    pub fn step(&mut self, e: f64, dt: f64) -> Result<GTick> {
        if !(dt > 0.0) {
            return Err(Error::Contract("dt must be positive"));
        }
        if !e.is_finite() {
            return Err(Error::NumericalBlowup { field: "tracking error" });
        }
        let x = -e;
        let limit = self.cfg.rate_limit;
        self.x_dot = filtered_derivative(self.x_dot, self.last_x, x, dt, self.cfg.derivative_tau).clamp(-limit, limit);
        self.last_x = Some(x);
        let x_dot = self.x_dot;
        self.sliding.integrate_error(x, dt);

        let [kx, kv] = self.cfg.input_gains;
        let z = DVector::from_column_slice(&[kx * x, kv * x_dot]);
        // Error magnitude for the growth gate: distance from the origin of the
        // scaled input space, so a vehicle still speeding up counts as worsening.
        let change = self.evolver.observe(&mut self.rules, &z, z.norm(), self.ticks as f64 * dt)?;
        let added: Vec<Option<usize>> = change.added.iter().map(|a| a.donor).collect();
        smc::resize_for_rules(&mut self.sliding, self.rules.block_len(), &change.removed, &added)?;

        let inference = fuzzy::infer(&self.rules, &z)?;
        self.evolver.record_usage(&inference.weights)?;

        let s = smc::sliding_value(x, x_dot, self.sliding.error_integral(), &self.sliding)?;
        smc::adapt_consequents(&mut self.sliding, &inference.regressor, s, dt)?;
        self.rules.set_consequent_vector(self.sliding.omega())?;
        smc::adapt_sliding_params(&mut self.sliding, s, x, x_dot, dt);

        let robust_term = smc::robustifying_term(s, &self.sliding);
        let raw = self.cfg.feedforward + self.cfg.output_gain * inference.output + robust_term;
        let u = raw.clamp(self.cfg.output_min, self.cfg.output_max);
        self.ticks += 1;
        Ok(GTick {
            u,
            saturated: u != raw,
            s,
            fuzzy_output: inference.output,
            robust_term,
            e_dot: -x_dot,
            rule_count: self.rules.len(),
            alpha: self.sliding.alpha(),
            change,
        })
    }
}
