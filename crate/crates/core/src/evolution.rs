//! Online evolution of the rule base.
//!
//! * Growth: when the running statistics of the tracking error are rising, a
//!   candidate rule at the current input is scored by its share of the total
//!   rule volume `det(Σ_new)^k / Σᵢ det(Σᵢ)^k` (datum significance) and added if
//!   the share reaches the growth threshold.
//! * Pruning: each rule's volume share, weighted by how much it has been used
//!   recently, is its influence; rules whose influence drops to `k_e` or below
//!   are removed.
//! * Winner adaptation: otherwise the best-matching rule moves towards the
//!   sample, with the change of its log-volume clipped per update so a category
//!   can only grow or shrink a little at a time.
//!
//! Determinant powers are handled as `exp(k·ln det Σ)` and normalised with a
//! log-sum-exp, so narrow rules never underflow to zero volume.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fuzzy::{self, FuzzyRule, RuleBase};
use crate::math::{exp, ln, log_sum_exp};

/// Running mean and variance of the error magnitude, with the previous pair
/// kept for the "is the error rising" test.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorStats {
    count: u64,
    mean: f64,
    variance: f64,
    prev_mean: f64,
    prev_variance: f64,
}

impl ErrorStats {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn previous(&self) -> (f64, f64) {
        (self.prev_mean, self.prev_variance)
    }

    /// ```text
    /// ē  ← ((n−1)/n)·ē  + e/n
    /// σ̄² ← ((n−1)/n)·σ̄² + (e − ē_prev)²/n
    /// ```
    pub fn update(&mut self, error: f64) {
        self.count += 1;
        let n = self.count as f64;
        let keep = (n - 1.0) / n;
        self.prev_mean = self.mean;
        self.prev_variance = self.variance;
        let dev = error - self.prev_mean;
        self.mean = keep * self.prev_mean + error / n;
        self.variance = keep * self.prev_variance + dev * dev / n;
    }

    /// `ē + σ̄² − (ē_prev + σ̄²_prev) > 0`.
    pub fn is_rising(&self) -> bool {
        self.mean + self.variance - (self.prev_mean + self.prev_variance) > 0.0
    }
}

pub fn update_error_stats(mut stats: ErrorStats, error: f64) -> ErrorStats {
    stats.update(error);
    stats
}

/// Exponent applied to rule determinants in volume ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeExponent {
    /// `det(Σ)^k` with k the input dimension.
    Dimension,
    /// `det(Σ)^(1/k)`, a geometric-mean width.
    InverseDimension,
}

/// What weights the volume share in the pruning influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contribution {
    /// Average normalised firing over the usage window, scaled so the most
    /// used rule has weight 1.
    AverageFiring,
    /// Volume share alone.
    VolumeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    /// Growth threshold g on the datum significance.
    pub growth_threshold: f64,
    /// Pruning parameter δ in [0.0001, 1]; the pruning threshold is k_e = 0.1·δ.
    pub prune_delta: f64,
    /// Winner learning rate β_w.
    pub winner_rate: f64,
    /// Largest |Δ ln det Σ| of the winner per update.
    pub log_det_clip: f64,
    /// New-rule width as a fraction of the distance to the nearest center.
    pub overlap_factor: f64,
    /// Width of the very first rule.
    pub initial_width: f64,
    /// Smallest width a rule is created with, and the level winners shrink to.
    pub min_width: f64,
    pub min_rules: usize,
    /// Samples in the firing-average window.
    pub usage_window: usize,
    pub volume_exponent: VolumeExponent,
    pub contribution: Contribution,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            growth_threshold: 0.1,
            prune_delta: 0.1,
            winner_rate: 0.05,
            log_det_clip: 0.05,
            overlap_factor: 0.5,
            initial_width: 0.5,
            min_width: 0.05,
            min_rules: 1,
            usage_window: 200,
            volume_exponent: VolumeExponent::Dimension,
            contribution: Contribution::AverageFiring,
        }
    }
}

impl EvolutionConfig {
    /// k_e = 10 % of δ.
    pub fn prune_threshold(&self) -> f64 {
        0.1 * self.prune_delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.growth_threshold > 0.0 && self.growth_threshold < 1.0) {
            return Err(Error::config("growth threshold must lie in (0, 1)"));
        }
        if !(0.0001..=1.0).contains(&self.prune_delta) {
            return Err(Error::config("prune delta must lie in [0.0001, 1]"));
        }
        if !(self.winner_rate > 0.0 && self.winner_rate < 1.0) {
            return Err(Error::config("winner rate must lie in (0, 1)"));
        }
        if !(self.log_det_clip > 0.0) {
            return Err(Error::config("log-det clip must be positive"));
        }
        if !(self.overlap_factor > 0.0 && self.initial_width > 0.0 && self.min_width > 0.0) {
            return Err(Error::config("rule widths must be positive"));
        }
        if self.min_rules < 1 {
            return Err(Error::config("at least one rule must survive pruning"));
        }
        if self.usage_window == 0 {
            return Err(Error::config("usage window must be non-empty"));
        }
        Ok(())
    }

    fn exponent(&self, dim: usize) -> f64 {
        match self.volume_exponent {
            VolumeExponent::Dimension => dim as f64,
            VolumeExponent::InverseDimension => 1.0 / dim as f64,
        }
    }
}

fn euclidean_nearest(rb: &RuleBase, z: &DVector<f64>) -> Option<(usize, f64)> {
    rb.rules().iter().enumerate().map(|(i, r)| (i, (z - r.center()).norm())).fold(None, |best, (i, d)| match best {
        Some((_, bd)) if bd <= d => best,
        _ => Some((i, d)),
    })
}

/// Width a rule created at `z` would get, and the donor it would copy.
pub fn candidate_width(rb: &RuleBase, z: &DVector<f64>, cfg: &EvolutionConfig) -> (f64, Option<usize>) {
    match euclidean_nearest(rb, z) {
        None => (cfg.initial_width, None),
        Some((i, dist)) => ((cfg.overlap_factor * dist).max(cfg.min_width), Some(i)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthDecision {
    pub grow: bool,
    /// Datum significance, when it was evaluated.
    pub significance: Option<f64>,
}

/// Decides whether a rule should be created at `z`.
pub fn growth_check(
    rb: &RuleBase,
    z: &DVector<f64>,
    stats: &ErrorStats,
    cfg: &EvolutionConfig,
) -> Result<GrowthDecision> {
    if rb.is_empty() {
        return Ok(GrowthDecision { grow: true, significance: Some(1.0) });
    }
    if z.len() != rb.n_inputs() {
        return Err(Error::Contract("input dimension does not match the rule base"));
    }
    if !stats.is_rising() {
        return Ok(GrowthDecision { grow: false, significance: None });
    }
    let n = rb.n_inputs();
    let k = cfg.exponent(n);
    let (width, _) = candidate_width(rb, z, cfg);
    let candidate = k * n as f64 * ln(width * width);
    let existing = rb.rules().iter().map(|r| k * r.log_det_covariance());
    let total = log_sum_exp(existing.chain(core::iter::once(candidate)));
    let significance = exp(candidate - total);
    Ok(GrowthDecision { grow: significance >= cfg.growth_threshold, significance: Some(significance) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleAddition {
    pub index: usize,
    /// Rule whose consequent was copied, `None` for the first rule.
    pub donor: Option<usize>,
}

/// Creates an isotropic rule centred at `z`.
pub fn add_rule(rb: &mut RuleBase, z: &DVector<f64>, cfg: &EvolutionConfig) -> Result<RuleAddition> {
    let (width, donor) = candidate_width(rb, z, cfg);
    let consequent = match donor {
        Some(i) => rb.rules()[i].consequent.clone(),
        None => DVector::zeros(rb.n_inputs() + 1),
    };
    let index = rb.push(FuzzyRule::isotropic(z.clone(), width, consequent)?)?;
    Ok(RuleAddition { index, donor })
}

/// Influence of every rule: usage weight times volume share.
pub fn rule_influence(rb: &RuleBase, usage: &[f64], cfg: &EvolutionConfig) -> Result<Vec<f64>> {
    if usage.len() != rb.len() {
        return Err(Error::Contract("usage weights must match the rule count"));
    }
    let k = cfg.exponent(rb.n_inputs());
    let volumes: Vec<f64> = rb.rules().iter().map(|r| k * r.log_det_covariance()).collect();
    let total = log_sum_exp(volumes.iter().copied());
    Ok(volumes
        .iter()
        .zip(usage)
        .map(|(v, eta)| {
            let eta = match cfg.contribution {
                Contribution::AverageFiring => *eta,
                Contribution::VolumeOnly => 1.0,
            };
            eta * exp(v - total)
        })
        .collect())
}

/// Rules to prune with their influence, in ascending index order.
///
/// The weakest rules go first and the rule base never drops below
/// `cfg.min_rules`.
pub fn prune_check(rb: &RuleBase, usage: &[f64], cfg: &EvolutionConfig) -> Result<Vec<(usize, f64)>> {
    if rb.is_empty() {
        return Err(Error::EmptyRuleBase);
    }
    let influence = rule_influence(rb, usage, cfg)?;
    let threshold = cfg.prune_threshold();
    let mut weak: Vec<(usize, f64)> = influence.iter().copied().enumerate().filter(|(_, e)| *e <= threshold).collect();
    weak.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let removable = rb.len().saturating_sub(cfg.min_rules);
    weak.truncate(removable);
    weak.sort_by_key(|(i, _)| *i);
    Ok(weak)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerUpdate {
    pub index: usize,
    /// Applied change of ln det Σ.
    pub log_det_change: f64,
}

/// Moves the best-matching rule towards `z`.
///
/// ```text
/// Θ ← Θ + β(Z − Θ)
/// Σ ← (1 − β)Σ + β((Z − Θ)(Z − Θ)ᵀ + w_min²·I)
/// ```
/// after which Σ is rescaled if its log-determinant moved by more than the clip.
pub fn gart_update_winner(rb: &mut RuleBase, z: &DVector<f64>, cfg: &EvolutionConfig) -> Result<WinnerUpdate> {
    let index = rb.winner(z)?;
    let rule = rb.rule_mut(index).ok_or(Error::EmptyRuleBase)?;
    let n = rule.dim();
    let beta = cfg.winner_rate;
    let offset = z - rule.center();
    let center = rule.center() + &offset * beta;

    let floor = DMatrix::identity(n, n) * (cfg.min_width * cfg.min_width);
    let mut covariance = rule.covariance() * (1.0 - beta) + (&offset * offset.transpose() + floor) * beta;
    fuzzy::symmetrize(&mut covariance);
    let (_, log_det) = fuzzy::factor(&covariance)?;
    let mut change = log_det - rule.log_det_covariance();
    if change.abs() > cfg.log_det_clip {
        let target = cfg.log_det_clip.copysign(change);
        covariance *= exp((target - change) / n as f64);
        change = target;
    }
    rule.set_center(center)?;
    rule.set_covariance(covariance)?;
    Ok(WinnerUpdate { index, log_det_change: change })
}

/// Sliding window of each rule's normalised firing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleUsage {
    window: usize,
    history: Vec<VecDeque<f64>>,
}

impl RuleUsage {
    pub fn new(window: usize) -> Self {
        Self { window, history: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn add_rule(&mut self) {
        self.history.push(VecDeque::with_capacity(self.window));
    }

    pub fn remove_rule(&mut self, index: usize) {
        self.history.remove(index);
    }

    pub fn record(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.history.len() {
            return Err(Error::Contract("usage weights must match the rule count"));
        }
        for (h, &w) in self.history.iter_mut().zip(weights) {
            if h.len() == self.window {
                h.pop_front();
            }
            h.push_back(w);
        }
        Ok(())
    }

    /// Average firing per rule relative to the most used rule. Rules without
    /// history count as fully used.
    pub fn contribution(&self) -> Vec<f64> {
        let means: Vec<Option<f64>> =
            self.history.iter().map(|h| (!h.is_empty()).then(|| h.iter().sum::<f64>() / h.len() as f64)).collect();
        let max = means.iter().flatten().copied().fold(0.0, f64::max);
        means
            .iter()
            .map(|m| match m {
                Some(m) if max > 0.0 => m / max,
                _ => 1.0,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Grow,
    Prune,
    AdaptWinner,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Grow => "grow",
            EventKind::Prune => "prune",
            EventKind::AdaptWinner => "adapt-winner",
        }
    }
}

impl core::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grow" => Ok(EventKind::Grow),
            "prune" => Ok(EventKind::Prune),
            "adapt-winner" => Ok(EventKind::AdaptWinner),
            other => Err(Error::config(alloc::format!("unknown event kind {other:?}"))),
        }
    }
}

/// One structural change of the rule base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionEvent {
    pub time: f64,
    pub kind: EventKind,
    pub rule: usize,
    /// Datum significance (grow), influence (prune) or log-det change (adapt-winner).
    pub metric: f64,
}

/// Structural outcome of one sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructureChange {
    pub added: Option<RuleAddition>,
    /// Indices removed, as they were before removal, ascending.
    pub removed: Vec<usize>,
}

/// Owns the error statistics, usage window and event log of one rule base.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolver {
    cfg: EvolutionConfig,
    stats: ErrorStats,
    usage: RuleUsage,
    events: Vec<EvolutionEvent>,
}

impl Evolver {
    pub fn new(cfg: EvolutionConfig) -> Self {
        Self { cfg, stats: ErrorStats::default(), usage: RuleUsage::new(cfg.usage_window), events: Vec::new() }
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &ErrorStats {
        &self.stats
    }

    pub fn events(&self) -> &[EvolutionEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<EvolutionEvent> {
        core::mem::take(&mut self.events)
    }

    /// Error statistics, then grow-or-adapt, then (if nothing grew) prune.
    pub fn observe(
        &mut self,
        rb: &mut RuleBase,
        z: &DVector<f64>,
        error_magnitude: f64,
        time: f64,
    ) -> Result<StructureChange> {
        self.stats.update(error_magnitude);
        let decision = growth_check(rb, z, &self.stats, &self.cfg)?;
        let mut change = StructureChange::default();
        if decision.grow {
            let added = add_rule(rb, z, &self.cfg)?;
            self.usage.add_rule();
            self.events.push(EvolutionEvent {
                time,
                kind: EventKind::Grow,
                rule: added.index,
                metric: decision.significance.unwrap_or(1.0),
            });
            change.added = Some(added);
            return Ok(change);
        }

        let update = gart_update_winner(rb, z, &self.cfg)?;
        self.events.push(EvolutionEvent {
            time,
            kind: EventKind::AdaptWinner,
            rule: update.index,
            metric: update.log_det_change,
        });

        let pruned = prune_check(rb, &self.usage.contribution(), &self.cfg)?;
        for &(index, influence) in pruned.iter().rev() {
            rb.remove(index)?;
            self.usage.remove_rule(index);
            self.events.push(EvolutionEvent { time, kind: EventKind::Prune, rule: index, metric: influence });
        }
        change.removed = pruned.into_iter().map(|(i, _)| i).collect();
        Ok(change)
    }

    /// Feeds the normalised weights of the latest inference into the usage window.
    pub fn record_usage(&mut self, weights: &[f64]) -> Result<()> {
        self.usage.record(weights)
    }
}
