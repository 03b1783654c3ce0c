//! Stratum-selection strategies.
//!
//! Four policies decide which stratum (coalition size) each sample of a
//! player's budget is drawn from:
//!
//! - `random`: a uniformly random stratum per sample with the samples
//!   pooled, i.e. plain permutation sampling;
//! - `equal`: deterministic round-robin, `N/n` samples per stratum;
//! - `neyman`: categorical draws proportional to known stratum standard
//!   deviations (an oracle baseline);
//! - `sigmoid`: the adaptive policy, mixing uniform exploration with
//!   draws proportional to the running standard-deviation estimates under a
//!   decreasing double-sigmoid exploration schedule.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapleyError};
use crate::stats::StratumStats;

pub const DEFAULT_GAMMA: f64 = 0.2;
pub const DEFAULT_BETA: f64 = 0.075;

/// Samples the adaptive policy wants in every stratum before it trusts
/// the standard-deviation estimates.
pub const WARM_START_VISITS: u64 = 2;

/// Exploration schedule `ε(t) = κ - 1 / (1 + exp(-(t - γN) / (βN)))`
/// with `κ` fixed so that `ε(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    gamma: f64,
    beta: f64,
    budget: usize,
    /// Logistic term at `t = 0`; `κ = 1 + offset`.
    offset: f64,
}

impl EpsilonSchedule {
    pub fn new(gamma: f64, beta: f64, budget: usize) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(ShapleyError::InvalidParameter(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        if !gamma.is_finite() {
            return Err(ShapleyError::InvalidParameter(format!(
                "gamma must be finite, got {gamma}"
            )));
        }
        if budget == 0 {
            return Err(ShapleyError::InvalidParameter(
                "sample budget must be >= 1".into(),
            ));
        }
        let mut s = EpsilonSchedule {
            gamma,
            beta,
            budget,
            offset: 0.0,
        };
        s.offset = s.logistic(0.0);
        Ok(s)
    }

    pub fn with_defaults(budget: usize) -> Self {
        Self::new(DEFAULT_GAMMA, DEFAULT_BETA, budget).expect("default schedule is valid")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn kappa(&self) -> f64 {
        1.0 + self.offset
    }

    #[inline]
    fn logistic(&self, t: f64) -> f64 {
        let n = self.budget as f64;
        1.0 / (1.0 + (-(t - self.gamma * n) / (self.beta * n)).exp())
    }

    /// `ε(t)`, written as `1 - (σ(t) - σ(0))` so that `ε(0)` is exactly 1.
    #[inline]
    pub fn epsilon(&self, t: f64) -> f64 {
        1.0 - (self.logistic(t) - self.offset)
    }
}

/// Free-function form of [`EpsilonSchedule::epsilon`].
pub fn epsilon(t: f64, schedule: &EpsilonSchedule) -> f64 {
    schedule.epsilon(t)
}

/// `π_j = ε/n + (1 - ε) σ̂_j / Σ σ̂`, with a uniform exploitation term when
/// every estimate is zero.
pub fn sampling_probabilities(eps: f64, sigma_hat: &[f64]) -> Vec<f64> {
    let n = sigma_hat.len();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let total: f64 = sigma_hat.iter().sum();
    sigma_hat
        .iter()
        .map(|&s| {
            let exploit = if total > 0.0 { s / total } else { uniform };
            eps * uniform + (1.0 - eps) * exploit
        })
        .collect()
}

/// Integer sample counts proportional to `sigma`, rounded by largest
/// remainder with ties to the lowest index. Counts sum to `budget`.
pub fn neyman_allocation(sigma: &[f64], budget: u64) -> Result<Vec<u64>> {
    if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(ShapleyError::InvalidParameter(
            "standard deviations must be finite and >= 0".into(),
        ));
    }
    let total: f64 = sigma.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(ShapleyError::InvalidParameter(
            "Neyman allocation needs at least one positive standard deviation".into(),
        ));
    }
    let targets: Vec<f64> = sigma.iter().map(|s| budget as f64 * s / total).collect();
    let mut counts: Vec<u64> = targets.iter().map(|t| t.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    // stable sort keeps lower indices first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut left = budget.saturating_sub(assigned);
    for &j in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if sigma[j] > 0.0 {
            counts[j] += 1;
            left -= 1;
        }
    }
    Ok(counts)
}

/// Policy choice by name, before it is bound to a player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Random,
    Equal,
    Neyman,
    Sigmoid { gamma: f64, beta: f64 },
}

impl PolicySpec {
    pub fn sigmoid() -> Self {
        PolicySpec::Sigmoid {
            gamma: DEFAULT_GAMMA,
            beta: DEFAULT_BETA,
        }
    }

    /// Canonical name: `random`, `equal`, `neyman`, `sigmoid`, or
    /// `sigmoid:<gamma>:<beta>` for non-default schedules.
    pub fn name(&self) -> String {
        match *self {
            PolicySpec::Random => "random".into(),
            PolicySpec::Equal => "equal".into(),
            PolicySpec::Neyman => "neyman".into(),
            PolicySpec::Sigmoid { gamma, beta } => {
                if gamma == DEFAULT_GAMMA && beta == DEFAULT_BETA {
                    "sigmoid".into()
                } else {
                    format!("sigmoid:{gamma}:{beta}")
                }
            }
        }
    }

    pub fn needs_sigma(&self) -> bool {
        matches!(self, PolicySpec::Neyman)
    }

    /// Binds the policy choice to one player's run of `budget` samples over `n`
    /// strata. `sigma` is required for `neyman` and ignored otherwise.
    pub fn instantiate(
        &self,
        n: usize,
        budget: usize,
        sigma: Option<&[f64]>,
    ) -> Result<AllocationPolicy> {
        if n == 0 {
            return Err(ShapleyError::InvalidParameter("no strata".into()));
        }
        Ok(match *self {
            PolicySpec::Random => AllocationPolicy::Random { n },
            PolicySpec::Equal => AllocationPolicy::Equal { n },
            PolicySpec::Neyman => {
                let sigma = sigma.ok_or_else(|| {
                    ShapleyError::InvalidParameter("neyman policy requires stratum sigmas".into())
                })?;
                AllocationPolicy::neyman(sigma)?
            }
            PolicySpec::Sigmoid { gamma, beta } => AllocationPolicy::Sigmoid {
                n,
                schedule: EpsilonSchedule::new(gamma, beta, budget)?,
            },
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PolicySpec {
    type Err = ShapleyError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let spec = match head {
            "random" => PolicySpec::Random,
            "equal" => PolicySpec::Equal,
            "neyman" => PolicySpec::Neyman,
            "sigmoid" => {
                let params: Vec<&str> = parts.by_ref().collect();
                return match params.as_slice() {
                    [] => Ok(PolicySpec::sigmoid()),
                    [g, b] => {
                        let parse = |x: &str| {
                            x.parse::<f64>().map_err(|_| {
                                ShapleyError::InvalidParameter(format!(
                                    "bad schedule parameter {x:?}"
                                ))
                            })
                        };
                        let (gamma, beta) = (parse(g)?, parse(b)?);
                        EpsilonSchedule::new(gamma, beta, 1)?;
                        Ok(PolicySpec::Sigmoid { gamma, beta })
                    }
                    _ => Err(ShapleyError::InvalidParameter(format!(
                        "expected sigmoid or sigmoid:<gamma>:<beta>, got {s:?}"
                    ))),
                };
            }
            _ => {
                return Err(ShapleyError::InvalidParameter(format!(
                    "unknown policy {s:?} (expected random | equal | neyman | sigmoid)"
                )))
            }
        };
        if parts.next().is_some() {
            return Err(ShapleyError::InvalidParameter(format!(
                "policy {head} takes no parameters"
            )));
        }
        Ok(spec)
    }
}

/// A policy bound to one player's estimation run.
#[derive(Debug, Clone, PartialEq)]
pub enum AllocationPolicy {
    Random { n: usize },
    Equal { n: usize },
    Neyman { probs: Vec<f64> },
    Sigmoid { n: usize, schedule: EpsilonSchedule },
}

impl AllocationPolicy {
    /// Oracle policy drawing strata with probability `σ_j / Σ σ`. Falls back
    /// to uniform when every stratum is constant.
    pub fn neyman(sigma: &[f64]) -> Result<Self> {
        if sigma.is_empty() {
            return Err(ShapleyError::InvalidParameter("no strata".into()));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(ShapleyError::InvalidParameter(
                "standard deviations must be finite and >= 0".into(),
            ));
        }
        Ok(AllocationPolicy::Neyman {
            probs: sampling_probabilities(0.0, sigma),
        })
    }

    pub fn n_strata(&self) -> usize {
        match self {
            AllocationPolicy::Random { n }
            | AllocationPolicy::Equal { n }
            | AllocationPolicy::Sigmoid { n, .. } => *n,
            AllocationPolicy::Neyman { probs } => probs.len(),
        }
    }

    /// Whether the estimate pools raw samples instead of averaging stratum
    /// means.
    pub fn pools_samples(&self) -> bool {
        matches!(self, AllocationPolicy::Random { .. })
    }

    pub fn budget(&self) -> Option<usize> {
        match self {
            AllocationPolicy::Sigmoid { schedule, .. } => Some(schedule.budget()),
            _ => None,
        }
    }

    /// Stratum probabilities at step `t` given the statistics so far.
    /// `Equal` reports the uniform distribution its round-robin realizes.
    pub fn probabilities(&self, t: usize, strata: &[StratumStats]) -> Vec<f64> {
        match self {
            AllocationPolicy::Random { n } | AllocationPolicy::Equal { n } => {
                vec![1.0 / *n as f64; *n]
            }
            AllocationPolicy::Neyman { probs } => probs.clone(),
            AllocationPolicy::Sigmoid { schedule, .. } => {
                let eps = schedule.epsilon(t as f64);
                match under_visited(strata) {
                    Some(mask) => {
                        let k = mask.iter().filter(|&&m| m).count() as f64;
                        let n = strata.len() as f64;
                        mask.iter()
                            .map(|&m| eps / n + (1.0 - eps) * if m { 1.0 / k } else { 0.0 })
                            .collect()
                    }
                    None => {
                        let sigma: Vec<f64> = strata.iter().map(StratumStats::sigma).collect();
                        sampling_probabilities(eps, &sigma)
                    }
                }
            }
        }
    }

    /// Chooses the stratum for sample `t` (zero-based).
    pub fn next_stratum<R: Rng + ?Sized>(
        &self,
        t: usize,
        strata: &[StratumStats],
        rng: &mut R,
    ) -> usize {
        match self {
            AllocationPolicy::Equal { n } => t % n,
            AllocationPolicy::Random { n } => rng.gen_range(0..*n),
            AllocationPolicy::Neyman { probs } => {
                let n = probs.len();
                // one pass over every stratum first so constant strata still
                // contribute their mean
                if t < n {
                    t
                } else {
                    categorical(probs.iter().copied(), rng)
                }
            }
            AllocationPolicy::Sigmoid { n, schedule } => {
                let n = *n;
                let missing: u64 = strata
                    .iter()
                    .map(|s| WARM_START_VISITS.saturating_sub(s.count))
                    .sum();
                let remaining = schedule.budget().saturating_sub(t) as u64;
                if missing > 0 && remaining <= missing {
                    // out of slack: fill the warm start deterministically
                    return strata
                        .iter()
                        .position(|s| s.count < WARM_START_VISITS)
                        .unwrap_or(0);
                }
                let eps = schedule.epsilon(t as f64);
                if rng.gen::<f64>() < eps {
                    return rng.gen_range(0..n);
                }
                if missing > 0 {
                    let k = rng.gen_range(
                        0..strata
                            .iter()
                            .filter(|s| s.count < WARM_START_VISITS)
                            .count(),
                    );
                    return strata
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.count < WARM_START_VISITS)
                        .nth(k)
                        .map(|(j, _)| j)
                        .unwrap_or(0);
                }
                let total: f64 = strata.iter().map(StratumStats::sigma).sum();
                if total > 0.0 {
                    categorical(strata.iter().map(|s| s.sigma() / total), rng)
                } else {
                    rng.gen_range(0..n)
                }
            }
        }
    }
}

fn under_visited(strata: &[StratumStats]) -> Option<Vec<bool>> {
    let mask: Vec<bool> = strata.iter().map(|s| s.count < WARM_START_VISITS).collect();
    mask.iter().any(|&m| m).then_some(mask)
}

/// Draws an index from unnormalized-safe weights that sum to ~1.
fn categorical<R: Rng + ?Sized, I: Iterator<Item = f64> + Clone>(probs: I, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, p) in probs.enumerate() {
        if p > 0.0 {
            last_positive = j;
        }
        acc += p;
        if u < acc {
            return j;
        }
    }
    // rounding left the cumulative sum just below 1
    last_positive
}
