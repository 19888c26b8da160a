//! Sliding-mode adaptation of the consequent vector.
//!
//! ```text
//! s_H = e + (α₂/α₁)·ė + (α₃/α₁)·∫e
//! ω  ← ω − dt·α₁·G·ψ·s_H
//! G  ← G − dt·G·ψ·ψᵀ·G / (1 + dt·ψᵀ·G·ψ)
//! ```
//!
//! The gain update is the exact solution of `Ġ = −G·ψ·ψᵀ·G` over one step with
//! ψ frozen (`G⁻¹` grows by `dt·ψψᵀ`), so it cannot leave the positive-definite
//! cone the way an explicit Euler step can.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{ensure_finite, Error, Result};
use crate::fuzzy::symmetrize;

/// Lower bound of α₁.
pub const ALPHA1_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcConfig {
    /// Initial (α₁, α₂, α₃).
    pub alpha_init: [f64; 3],
    /// Learning rates (γ₁, γ₂, γ₃) of the sliding parameters.
    pub gamma: [f64; 3],
    /// Ceilings of (α₁, α₂, α₃).
    pub alpha_max: [f64; 3],
    /// Robustifying gain k_r (output units).
    pub robust_gain: f64,
    /// Boundary-layer width φ_b (sliding-value units).
    pub boundary_layer: f64,
    /// Diagonal gain g₀ given to the block of every new rule.
    pub initial_gain: f64,
    /// Bound on |∫e| (m·s); infinite disables it.
    pub integral_limit: f64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            alpha_init: [1e-6, 1e-6, 1e-12],
            gamma: [1e-4, 1e-5, 1e-7],
            alpha_max: [1.0, 1.0, 0.1],
            robust_gain: 0.02,
            boundary_layer: 0.05,
            initial_gain: 100.0,
            integral_limit: f64::INFINITY,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_init[0] >= ALPHA1_FLOOR) {
            return Err(Error::config("initial alpha1 is below its floor"));
        }
        if self.alpha_init.iter().chain(&self.gamma).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::config("sliding parameters and learning rates must be finite and non-negative"));
        }
        if self.alpha_max[0] < ALPHA1_FLOOR || self.alpha_max.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("alpha ceilings must be non-negative and alpha1 ceiling above its floor"));
        }
        if !(self.robust_gain >= 0.0 && self.robust_gain.is_finite()) {
            return Err(Error::config("robustifying gain must be non-negative"));
        }
        if !(self.boundary_layer > 0.0 && self.boundary_layer.is_finite()) {
            return Err(Error::config("boundary layer must be positive"));
        }
        if !(self.initial_gain > 0.0 && self.initial_gain.is_finite()) {
            return Err(Error::config("initial gain must be positive"));
        }
        if !(self.integral_limit > 0.0) {
            return Err(Error::config("integral limit must be positive"));
        }
        Ok(())
    }
}

/// Adaptation state: sliding parameters, error integral, consequents and gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingState {
    pub cfg: SmcConfig,
    alpha: [f64; 3],
    error_integral: f64,
    omega: DVector<f64>,
    gain: DMatrix<f64>,
}

impl SlidingState {
    /// State for an empty rule base.
    pub fn new(cfg: SmcConfig) -> Self {
        let mut alpha = cfg.alpha_init;
        alpha[0] = alpha[0].max(ALPHA1_FLOOR);
        Self { cfg, alpha, error_integral: 0.0, omega: DVector::zeros(0), gain: DMatrix::zeros(0, 0) }
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn error_integral(&self) -> f64 {
        self.error_integral
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// `(λ₁, λ₂) = (α₂/α₁, α₃/α₁)`.
    pub fn lambdas(&self) -> (f64, f64) {
        (self.alpha[1] / self.alpha[0], self.alpha[2] / self.alpha[0])
    }

    pub fn set_alpha(&mut self, alpha: [f64; 3]) -> Result<()> {
        if !(alpha[0] >= ALPHA1_FLOOR) || alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Contract("alpha1 must stay above its floor"));
        }
        self.alpha = alpha;
        Ok(())
    }

    /// Replaces ω, e.g. after the rules were edited by hand.
    pub fn set_omega(&mut self, omega: DVector<f64>) -> Result<()> {
        if omega.len() != self.omega.len() {
            return Err(Error::Contract("consequent vector length mismatch"));
        }
        self.omega = omega;
        Ok(())
    }

    /// Accumulates `e·dt`, clamped to the integral limit.
    pub fn integrate_error(&mut self, e: f64, dt: f64) {
        let limit = self.cfg.integral_limit;
        self.error_integral = (self.error_integral + e * dt).clamp(-limit, limit);
    }
}

/// Value of the sliding surface.
pub fn sliding_value(e: f64, e_dot: f64, e_int: f64, ss: &SlidingState) -> Result<f64> {
    let [a1, a2, a3] = ss.alpha;
    if !(a1 >= ALPHA1_FLOOR) {
        return Err(Error::Contract("alpha1 is below its floor"));
    }
    ensure_finite(e + a2 / a1 * e_dot + a3 / a1 * e_int, "sliding value")
}

/// One step of the consequent and gain adaptation.
pub fn adapt_consequents(ss: &mut SlidingState, psi: &DVector<f64>, s: f64, dt: f64) -> Result<()> {
    if psi.len() != ss.omega.len() {
        return Err(Error::Contract("regressor length does not match the consequent vector"));
    }
    let g_psi = &ss.gain * psi;
    let step = ss.alpha[0] * dt * s;
    let omega = &ss.omega - &g_psi * step;
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup { field: "consequent vector" });
    }

    let denom = 1.0 + dt * psi.dot(&g_psi);
    let mut gain = &ss.gain - (&g_psi * g_psi.transpose()) * (dt / denom);
    symmetrize(&mut gain);
    if gain.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup { field: "adaptation gain" });
    }
    ss.omega = omega;
    ss.gain = gain;
    Ok(())
}

/// Appends one consequent block (copied from `donor`, zeros otherwise) with a
/// decoupled `g₀·I` gain block.
pub fn grow_block(ss: &mut SlidingState, block: usize, donor: Option<usize>) -> Result<()> {
    let old = ss.omega.len();
    if block == 0 || old % block != 0 {
        return Err(Error::Contract("block length does not divide the consequent vector"));
    }
    let seed = match donor {
        Some(d) if (d + 1) * block <= old => ss.omega.rows(d * block, block).into_owned(),
        Some(_) => return Err(Error::Contract("donor rule index out of range")),
        None => DVector::zeros(block),
    };
    let new = old + block;
    let mut omega = ss.omega.clone().resize_vertically(new, 0.0);
    omega.rows_mut(old, block).copy_from(&seed);
    let mut gain = ss.gain.clone().resize(new, new, 0.0);
    for i in old..new {
        gain[(i, i)] = ss.cfg.initial_gain;
    }
    ss.omega = omega;
    ss.gain = gain;
    Ok(())
}

/// Deletes the block of rule `index`.
pub fn remove_block(ss: &mut SlidingState, index: usize, block: usize) -> Result<()> {
    let start = index * block;
    if block == 0 || start + block > ss.omega.len() {
        return Err(Error::Contract("rule index out of range"));
    }
    ss.omega = ss.omega.clone().remove_rows(start, block);
    ss.gain = ss.gain.clone().remove_rows(start, block).remove_columns(start, block);
    Ok(())
}

/// Applies a rule-count change: `removed` indices refer to the rule order
/// before removal; `added` donors are applied after the removals.
pub fn resize_for_rules(ss: &mut SlidingState, block: usize, removed: &[usize], added: &[Option<usize>]) -> Result<()> {
    let mut sorted = removed.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &i in sorted.iter().rev() {
        remove_block(ss, i, block)?;
    }
    for &donor in added {
        grow_block(ss, block, donor)?;
    }
    Ok(())
}

/// Self-organising sliding parameters.
///
/// ```text
/// α₁ ← max(floor, α₁ + dt·γ₁·|s|)
/// α₂ ← α₂ + dt·γ₂·|s·ė|
/// α₃ ← α₃ + dt·γ₃·|s·e|
/// ```
/// each clamped to its ceiling.
pub fn adapt_sliding_params(ss: &mut SlidingState, s: f64, e: f64, e_dot: f64, dt: f64) {
    let [g1, g2, g3] = ss.cfg.gamma;
    let [m1, m2, m3] = ss.cfg.alpha_max;
    let [a1, a2, a3] = ss.alpha;
    ss.alpha = [
        (a1 + dt * g1 * s.abs()).min(m1).max(ALPHA1_FLOOR),
        (a2 + dt * g2 * (s * e_dot).abs()).min(m2),
        (a3 + dt * g3 * (s * e).abs()).min(m3),
    ];
}

/// `−k_r·sat(s/φ_b)`.
pub fn robustifying_term(s: f64, ss: &SlidingState) -> f64 {
    -ss.cfg.robust_gain * (s / ss.cfg.boundary_layer).clamp(-1.0, 1.0)
}

/// Smallest eigenvalue of G, `None` while there are no rules.
pub fn min_gain_eigenvalue(ss: &SlidingState) -> Option<f64> {
    if ss.gain.is_empty() {
        return None;
    }
    SymmetricEigen::new(ss.gain.clone()).eigenvalues.min().into()
}
