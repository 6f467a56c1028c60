//! Water-filling power allocation over parallel eigenmodes.
//!
//! [`waterfill`] maximizes `Σ ln(1 + g_i·P_i)` under a power budget.
//! [`inverse_waterfill`] solves the reverse problem: the least total power
//! that reaches an exact sum rate. Both use a closed-form active set.

use crate::error::{invalid, Result};
use crate::rates::RateNats;

/// Eigenmode power gains `σ_i²`, sorted descending, all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    /// Sorts `gains` descending. Rejects empty input and non-positive or
    /// non-finite gains.
    pub fn new(mut gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(invalid("gain vector is empty"));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(invalid(format!("gains must be finite and > 0, got {g}")));
        }
        gains.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(gains))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `k` strongest gains.
    pub fn top(&self, k: usize) -> Result<GainVector> {
        if k == 0 || k > self.0.len() {
            return Err(invalid(format!("cannot take {k} of {} gains", self.0.len())));
        }
        Ok(Self(self.0[..k].to_vec()))
    }

    /// `Σ ln(1 + g_i·P_i)`.
    pub fn sum_rate(&self, powers: &[f64]) -> f64 {
        self.0.iter().zip(powers).map(|(g, p)| (g * p).ln_1p()).sum()
    }
}

/// Per-symbol powers, aligned with the gains they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub total: f64,
    pub achieved_rate: RateNats,
}

impl PowerAllocation {
    fn from_powers(gains: &GainVector, powers: Vec<f64>) -> Result<Self> {
        let total = powers.iter().sum();
        let achieved_rate = RateNats::from_computed(gains.sum_rate(&powers))?;
        Ok(Self {
            powers,
            total,
            achieved_rate,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            powers: vec![0.0; n],
            total: 0.0,
            achieved_rate: RateNats::ZERO,
        }
    }
}

/// Conventional water-filling: `P_i = max(0, μ − 1/g_i)` with `Σ P_i = budget`.
pub fn waterfill(gains: &GainVector, budget: f64) -> Result<PowerAllocation> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(invalid(format!("power budget must be finite and >= 0, got {budget}")));
    }
    let g = gains.as_slice();
    if budget == 0.0 {
        return Ok(PowerAllocation::zeros(g.len()));
    }
    let mut inv_sum = 0.0;
    let mut level = 0.0;
    let mut active = 0;
    for (k, &gk) in g.iter().enumerate() {
        inv_sum += 1.0 / gk;
        let mu = (budget + inv_sum) / (k + 1) as f64;
        if mu > 1.0 / gk {
            level = mu;
            active = k + 1;
        } else {
            break;
        }
    }
    let mut powers: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(i, &gi)| if i < active { (level - 1.0 / gi).max(0.0) } else { 0.0 })
        .collect();
    // Put the rounding residue on the strongest channel so Σ P_i = budget.
    let residue = budget - powers.iter().sum::<f64>();
    powers[0] += residue;
    PowerAllocation::from_powers(gains, powers)
}

/// The water level `−ν` of the minimum-power allocation reaching `rate`.
fn inverse_level(g: &[f64], rate: f64) -> (f64, usize) {
    let d = g.len();
    let mut log_sum = 0.0;
    let mut fallback = None;
    for k in 1..=d {
        log_sum += g[k - 1].ln();
        let level = ((rate - log_sum) / k as f64).exp();
        if level >= 1.0 / g[k - 1] {
            fallback = Some((level, k));
            if k == d || level < 1.0 / g[k] {
                return (level, k);
            }
        }
    }
    // Round-off can break the bracketing test; the largest feasible active
    // set is then the answer.
    fallback.unwrap_or_else(|| (((rate - g[0].ln()).exp()), 1))
}

/// Minimum total power with `Σ ln(1 + g_i·P_i) = target_rate` and `P_i ≥ 0`.
///
/// There is no power budget here; callers compare the total against theirs.
pub fn inverse_waterfill(gains: &GainVector, target_rate: RateNats) -> Result<PowerAllocation> {
    let g = gains.as_slice();
    let rate = target_rate.value();
    if rate == 0.0 {
        return Ok(PowerAllocation::zeros(g.len()));
    }
    let (level, active) = inverse_level(g, rate);
    let powers: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(i, &gi)| if i < active { (level - 1.0 / gi).max(0.0) } else { 0.0 })
        .collect();
    PowerAllocation::from_powers(gains, powers)
}

/// Fraction of `p_total` consumed by `alloc`; above 1 means infeasible.
pub fn power_ratio(alloc: &PowerAllocation, p_total: f64) -> Result<f64> {
    if !(p_total > 0.0) || !p_total.is_finite() {
        return Err(invalid(format!("total power must be finite and > 0, got {p_total}")));
    }
    Ok(alloc.total / p_total)
}
