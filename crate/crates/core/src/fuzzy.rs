//! First-order Takagi-Sugeno inference with multivariate Gaussian premises.
//!
//! Rule `i` fires with `Rᵢ = exp(−(Z−Θᵢ)ᵀ Σᵢ⁻¹ (Z−Θᵢ))` and the model output is
//! the normalised firing-weighted sum of the local affine models
//! `yᵢ = b₀ᵢ + bᵢ·Z`.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{exp, ln};

/// Firing strengths are floored here; below it a rule counts as silent.
pub const FIRING_FLOOR: f64 = 1e-300;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// One rule: Gaussian premise plus affine consequent.
///
/// Both the covariance and its inverse are kept, together with the
/// log-determinant, so inference never inverts and volume ratios never
/// underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRule {
    center: DVector<f64>,
    covariance: DMatrix<f64>,
    inverse_covariance: DMatrix<f64>,
    log_det: f64,
    /// `[b₀, b₁, …, bₙ]`.
    pub consequent: DVector<f64>,
}

pub(crate) fn factor(covariance: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = covariance.nrows();
    if covariance.ncols() != n {
        return Err(Error::Contract("covariance must be square"));
    }
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup { field: "rule covariance" });
    }
    let scale = covariance.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::Contract("covariance must be symmetric"));
            }
        }
    }
    let chol = Cholesky::new(covariance.clone()).ok_or(Error::Contract("covariance must be positive definite"))?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| ln(*d)).sum::<f64>();
    let mut inverse = chol.inverse();
    symmetrize(&mut inverse);
    Ok((inverse, log_det))
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

impl FuzzyRule {
    pub fn new(center: DVector<f64>, covariance: DMatrix<f64>, consequent: DVector<f64>) -> Result<Self> {
        let n = center.len();
        if covariance.nrows() != n || consequent.len() != n + 1 {
            return Err(Error::Contract("rule dimensions disagree"));
        }
        if center.iter().chain(consequent.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { field: "rule center or consequent" });
        }
        let (inverse_covariance, log_det) = factor(&covariance)?;
        Ok(Self { center, covariance, inverse_covariance, log_det, consequent })
    }

    /// Isotropic rule `Σ = width²·I`.
    pub fn isotropic(center: DVector<f64>, width: f64, consequent: DVector<f64>) -> Result<Self> {
        let n = center.len();
        Self::new(center, DMatrix::identity(n, n) * (width * width), consequent)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn inverse_covariance(&self) -> &DMatrix<f64> {
        &self.inverse_covariance
    }

    /// `ln det Σ`.
    pub fn log_det_covariance(&self) -> f64 {
        self.log_det
    }

    pub fn set_center(&mut self, center: DVector<f64>) -> Result<()> {
        if center.len() != self.dim() {
            return Err(Error::Contract("center dimension mismatch"));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { field: "rule center" });
        }
        self.center = center;
        Ok(())
    }

    /// Replaces Σ and refreshes Σ⁻¹ and the log-determinant together.
    pub fn set_covariance(&mut self, covariance: DMatrix<f64>) -> Result<()> {
        if covariance.nrows() != self.dim() {
            return Err(Error::Contract("covariance dimension mismatch"));
        }
        let (inverse, log_det) = factor(&covariance)?;
        self.covariance = covariance;
        self.inverse_covariance = inverse;
        self.log_det = log_det;
        Ok(())
    }

    /// Squared Mahalanobis distance of `z` from the rule center.
    pub fn mahalanobis_sq(&self, z: &DVector<f64>) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::Contract("input dimension does not match the rule"));
        }
        let d = z - &self.center;
        Ok((&self.inverse_covariance * &d).dot(&d).max(0.0))
    }

    /// Local affine model `b₀ + b·z`.
    pub fn local_output(&self, z: &DVector<f64>) -> f64 {
        self.consequent[0] + self.consequent.rows(1, self.dim()).iter().zip(z.iter()).map(|(b, x)| b * x).sum::<f64>()
    }
}

/// Membership degree of `z` in the rule, in `[FIRING_FLOOR, 1]`.
pub fn firing_strength(rule: &FuzzyRule, z: &DVector<f64>) -> Result<f64> {
    let log_firing = -rule.mahalanobis_sq(z)?;
    Ok(exp(log_firing).max(FIRING_FLOOR))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    n_inputs: usize,
    rules: Vec<FuzzyRule>,
}

impl RuleBase {
    pub fn new(n_inputs: usize) -> Self {
        Self { n_inputs, rules: Vec::new() }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn rule_mut(&mut self, index: usize) -> Option<&mut FuzzyRule> {
        self.rules.get_mut(index)
    }

    pub fn push(&mut self, rule: FuzzyRule) -> Result<usize> {
        if rule.dim() != self.n_inputs {
            return Err(Error::Contract("rule dimension does not match the rule base"));
        }
        self.rules.push(rule);
        Ok(self.rules.len() - 1)
    }

    pub fn remove(&mut self, index: usize) -> Result<FuzzyRule> {
        if index >= self.rules.len() {
            return Err(Error::Contract("rule index out of range"));
        }
        Ok(self.rules.remove(index))
    }

    /// Block length of one rule in the stacked consequent vector.
    pub fn block_len(&self) -> usize {
        self.n_inputs + 1
    }

    /// All consequents stacked in rule order.
    pub fn consequent_vector(&self) -> DVector<f64> {
        let block = self.block_len();
        let mut out = DVector::zeros(block * self.rules.len());
        for (i, rule) in self.rules.iter().enumerate() {
            out.rows_mut(i * block, block).copy_from(&rule.consequent);
        }
        out
    }

    /// Writes a stacked consequent vector back into the rules.
    pub fn set_consequent_vector(&mut self, omega: &DVector<f64>) -> Result<()> {
        let block = self.block_len();
        if omega.len() != block * self.rules.len() {
            return Err(Error::Contract("consequent vector length mismatch"));
        }
        for (i, rule) in self.rules.iter_mut().enumerate() {
            rule.consequent.copy_from(&omega.rows(i * block, block));
        }
        Ok(())
    }

    /// Index of the rule with the largest firing (smallest Mahalanobis distance).
    pub fn winner(&self, z: &DVector<f64>) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, rule) in self.rules.iter().enumerate() {
            let d = rule.mahalanobis_sq(z)?;
            if best.map_or(true, |(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i).ok_or(Error::EmptyRuleBase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub output: f64,
    /// Raw firing degrees Rᵢ.
    pub firing: Vec<f64>,
    /// Normalised weights ψᵢ.
    pub weights: Vec<f64>,
    /// `ψᵢ·(1, Z)` blocks stacked in rule order.
    pub regressor: DVector<f64>,
}

/// Model output for input `z`.
///
/// If every rule is below [`FIRING_FLOOR`] the nearest rule (Mahalanobis) takes
/// the full weight.
pub fn infer(rb: &RuleBase, z: &DVector<f64>) -> Result<InferenceResult> {
    if rb.is_empty() {
        return Err(Error::EmptyRuleBase);
    }
    if z.len() != rb.n_inputs {
        return Err(Error::Contract("input dimension does not match the rule base"));
    }
    let firing = rb.rules.iter().map(|r| firing_strength(r, z)).collect::<Result<Vec<_>>>()?;
    let total: f64 = firing.iter().sum();
    let weights: Vec<f64> = if firing.iter().any(|&f| f > FIRING_FLOOR) {
        firing.iter().map(|f| f / total).collect()
    } else {
        let nearest = rb.winner(z)?;
        (0..rb.len()).map(|i| if i == nearest { 1.0 } else { 0.0 }).collect()
    };

    let block = rb.block_len();
    let mut regressor = DVector::zeros(block * rb.len());
    let mut output = 0.0;
    for (i, (rule, &w)) in rb.rules.iter().zip(weights.iter()).enumerate() {
        output += w * rule.local_output(z);
        regressor[i * block] = w;
        for (k, x) in z.iter().enumerate() {
            regressor[i * block + 1 + k] = w * x;
        }
    }
    Ok(InferenceResult { output, firing, weights, regressor })
}
