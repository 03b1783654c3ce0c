//! Stratum profiles and the closed-form variances of the stratified
//! statistic under the three allocation regimes.
//!
//! With per-stratum means `μ_j` and standard deviations `σ_j` over the
//! `n` strata of one player and a budget of `N` samples:
//!
//! - optimal (σ-proportional) allocation: `mean(σ)^2 / N`
//! - equal allocation:                    `mean(σ^2) / N`
//! - simple random sampling:              `(mean(σ^2) + var(μ)) / N`
//!
//! Moments over strata are population moments. Since
//! `mean(σ^2) = mean(σ)^2 + var(σ)` the three are always ordered.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, PlayerId};
use crate::error::{Result, ShapleyError};
use crate::game::{Game, ValueOracle};
use crate::numeric::{mean, population_variance};
use crate::sampling::CoalitionSampler;
use crate::stats::StratumStats;

/// Largest `n` for which [`exhaustive_profile`] is allowed by default
/// (`n · 2^(n-1)` marginal evaluations).
pub const EXHAUSTIVE_PROFILE_CAP: usize = 20;

/// Per-stratum mean and standard deviation of one player's marginal
/// contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataProfile {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl StrataProfile {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(ShapleyError::DimensionMismatch {
                expected: mu.len(),
                actual: sigma.len(),
            });
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(ShapleyError::InvalidParameter(
                "stratum standard deviations must be finite and >= 0".into(),
            ));
        }
        Ok(StrataProfile { mu, sigma })
    }

    /// Profile with every mean zero; enough for the spread-only formulas.
    pub fn from_sigma(sigma: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; sigma.len()], sigma)
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// The player's Shapley value `mean(μ)`.
    pub fn shapley(&self) -> f64 {
        mean(&self.mu)
    }

    /// `mean(σ^2)`, assembled as `mean(σ)^2 + var(σ)` so that the three
    /// regime variances are ordered exactly in floating point too.
    fn mean_sigma_sq(&self) -> f64 {
        let m = mean(&self.sigma);
        m * m + population_variance(&self.sigma)
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if budget > 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(ShapleyError::InvalidParameter(format!(
            "sample budget must be > 0, got {budget}"
        )))
    }
}

/// Minimum variance of the stratified statistic, reached by allocating
/// samples in proportion to the stratum standard deviations.
pub fn analytic_var_sd(profile: &StrataProfile, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    let m = mean(&profile.sigma);
    Ok(m * m / budget)
}

/// Variance of the plain sample mean when coalitions are drawn without
/// regard to strata.
pub fn analytic_var_rs(profile: &StrataProfile, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    Ok((profile.mean_sigma_sq() + population_variance(&profile.mu)) / budget)
}

/// Variance of the stratified statistic with `N/n` samples per stratum.
pub fn analytic_var_es(profile: &StrataProfile, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    Ok(profile.mean_sigma_sq() / budget)
}

/// `var_ES / var_SD = 1 + var(σ) / mean(σ)^2`, independent of `N`.
pub fn benefit_ratio(profile: &StrataProfile) -> Result<f64> {
    let m = mean(&profile.sigma);
    if m.is_nan() || m <= 0.0 {
        return Err(ShapleyError::InvalidParameter(
            "benefit ratio undefined: every stratum has zero spread".into(),
        ));
    }
    Ok(1.0 + population_variance(&profile.sigma) / (m * m))
}

/// Exact profile by enumerating every coalition of `X \ {i}`.
pub fn exhaustive_profile<G: Game>(
    oracle: &ValueOracle<G>,
    player: PlayerId,
    cap: usize,
) -> Result<StrataProfile> {
    let n = oracle.n();
    if n > cap.min(63) {
        return Err(ShapleyError::TooManyPlayers {
            n,
            cap: cap.min(63),
        });
    }
    let i = player.index();
    if i >= n {
        return Err(ShapleyError::PlayerOutOfRange { player: i, n });
    }
    let mut strata = vec![StratumStats::new(); n];
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let mut s = Coalition::empty(n);
    for mask in 0u64..(1u64 << (n - 1)) {
        s.clear();
        let mut bits = mask;
        while bits != 0 {
            s.insert(others[bits.trailing_zeros() as usize]);
            bits &= bits - 1;
        }
        let j = mask.count_ones() as usize;
        strata[j].push(oracle.marginal_unchecked(i, &s));
    }
    // complete enumeration: population moments
    let mu = strata.iter().map(|s| s.mean).collect();
    let sigma = strata
        .iter()
        .map(|s| (s.m2.max(0.0) / s.count as f64).sqrt())
        .collect();
    StrataProfile::new(mu, sigma)
}

/// Estimated profile from `per_stratum` samples in every stratum.
pub fn pilot_profile<G: Game, R: Rng + ?Sized>(
    oracle: &ValueOracle<G>,
    player: PlayerId,
    per_stratum: usize,
    rng: &mut R,
) -> Result<StrataProfile> {
    if per_stratum < 2 {
        return Err(ShapleyError::InvalidParameter(format!(
            "pilot needs >= 2 samples per stratum, got {per_stratum}"
        )));
    }
    let n = oracle.n();
    let mut sampler = CoalitionSampler::new(n, player)?;
    let mut s = Coalition::empty(n);
    let mut mu = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for j in 0..n {
        let mut stats = StratumStats::new();
        for _ in 0..per_stratum {
            sampler.sample_into(j, rng, &mut s);
            stats.update(oracle.marginal_unchecked(player.index(), &s))?;
        }
        mu.push(stats.mean);
        sigma.push(stats.sigma());
    }
    StrataProfile::new(mu, sigma)
}
