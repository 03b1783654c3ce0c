//! The stratified Shapley statistic and its budget-balanced correction.
//!
//! For player `i`, stratum `j` holds the marginal contributions to the
//! coalitions of size `j` drawn from the other players. The Shapley value is
//! the plain average of the `n` stratum means, so a player's estimate is
//! the average of the sampled stratum means no matter how the budget was
//! split between strata.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, PlayerId};
use crate::error::{Result, ShapleyError};
use crate::game::{Game, ValueOracle};
use crate::numeric::{accurate_sum, NeumaierSum};
use crate::parallel::Execution;
use crate::policy::{AllocationPolicy, PolicySpec};
use crate::sampling::{CoalitionSampler, RngSeed};
use crate::stats::StratumStats;

/// One player's sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerEstimate {
    /// The statistic `T_i`.
    pub t: f64,
    /// `(1/n^2) Σ_j σ̂_j^2`, the weight used by the budget correction.
    pub var_t: f64,
    pub strata: Vec<StratumStats>,
    pub samples: u64,
}

/// Samples `budget` marginal contributions of `player`, choosing the
/// stratum of each with `policy`, and summarizes them.
///
/// Strata never visited enter with mean and spread zero. Under the
/// `random` policy the samples are pooled instead, which is plain
/// permutation sampling.
pub fn stratified_estimate<G: Game, R: Rng + ?Sized>(
    oracle: &ValueOracle<G>,
    player: PlayerId,
    policy: &AllocationPolicy,
    budget: usize,
    rng: &mut R,
) -> Result<PlayerEstimate> {
    let n = oracle.n();
    if budget < 1 {
        return Err(ShapleyError::InvalidParameter(
            "sample budget must be >= 1".into(),
        ));
    }
    if policy.n_strata() != n {
        return Err(ShapleyError::DimensionMismatch {
            expected: n,
            actual: policy.n_strata(),
        });
    }
    if let Some(b) = policy.budget() {
        if b != budget {
            return Err(ShapleyError::InvalidParameter(format!(
                "policy schedule built for {b} samples, run asked for {budget}"
            )));
        }
    }
    let i = player.index();
    let mut sampler = CoalitionSampler::new(n, player)?;
    let mut strata = vec![StratumStats::new(); n];
    let mut s = Coalition::empty(n);
    for t in 0..budget {
        let j = policy.next_stratum(t, &strata, rng);
        sampler.sample_into(j, rng, &mut s);
        let x = oracle.marginal_unchecked(i, &s);
        if x.is_nan() {
            return Err(ShapleyError::InvalidParameter(format!(
                "game returned NaN for player {i}, coalition {s:?}"
            )));
        }
        strata[j].push(x);
    }

    let (t, var_t) = if policy.pools_samples() {
        pooled_summary(&strata, n)
    } else {
        let mut sum = NeumaierSum::new();
        sum.extend(strata.iter().map(StratumStats::mean_or_zero));
        let mut var = NeumaierSum::new();
        var.extend(strata.iter().map(StratumStats::variance));
        let nf = n as f64;
        (sum.value() / nf, var.value() / (nf * nf))
    };
    Ok(PlayerEstimate {
        t,
        var_t,
        strata,
        samples: budget as u64,
    })
}

/// Mean and variance weight of all samples taken together, merged from
/// the per-stratum accumulators. The weight is the per-sample variance
/// over `n`, the same scale the stratified weight has.
fn pooled_summary(strata: &[StratumStats], n: usize) -> (f64, f64) {
    let count: u64 = strata.iter().map(|s| s.count).sum();
    if count == 0 {
        return (0.0, 0.0);
    }
    let mut total = NeumaierSum::new();
    total.extend(strata.iter().map(|s| s.count as f64 * s.mean));
    let mean = total.value() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let mut m2 = NeumaierSum::new();
    m2.extend(
        strata
            .iter()
            .filter(|s| s.count > 0)
            .map(|s| s.m2 + s.count as f64 * (s.mean - mean).powi(2)),
    );
    let var = m2.value().max(0.0) / (count - 1) as f64;
    (mean, var / n as f64)
}

/// Maximum-likelihood Shapley values under the constraint that they sum
/// to `budget`:
///
/// `φ̂_i = T_i - (σ_i^2 / Σ_m σ_m^2) (Σ_m T_m - budget)`.
///
/// If every variance is zero the discrepancy is split evenly.
pub fn mle_budget_balance(t: &[f64], var_t: &[f64], budget: f64) -> Result<Vec<f64>> {
    if t.len() != var_t.len() {
        return Err(ShapleyError::DimensionMismatch {
            expected: t.len(),
            actual: var_t.len(),
        });
    }
    if var_t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ShapleyError::InvalidParameter(
            "variances must be finite and >= 0".into(),
        ));
    }
    let n = t.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let total_var = accurate_sum(var_t);
    let weights: Vec<f64> = if total_var > 0.0 {
        var_t.iter().map(|v| v / total_var).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let excess = accurate_sum(t) - budget;
    if excess == 0.0 {
        return Ok(t.to_vec());
    }
    let mut phi: Vec<f64> = t
        .iter()
        .zip(&weights)
        .map(|(t, w)| t - w * excess)
        .collect();
    // second pass mops up the rounding left by the first
    let residual = accurate_sum(&phi) - budget;
    if residual != 0.0 {
        for (p, w) in phi.iter_mut().zip(&weights) {
            *p -= w * residual;
        }
    }
    Ok(phi)
}

/// Estimates for every player of one game in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub policy: String,
    pub samples_per_player: usize,
    pub seed: u64,
    pub repetition: u64,
    /// `v(X)`, the amount the corrected values must add up to.
    pub budget: f64,
    pub t: Vec<f64>,
    pub var_t: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub samples_used: Vec<u64>,
    /// `strata[i][j]`: player `i`, coalition size `j`.
    pub strata: Vec<Vec<StratumStats>>,
}

/// Runs [`stratified_estimate`] for every player (in parallel when
/// enabled) and balances the result against `v(X)`.
///
/// Player `i` of repetition `r` always draws from `seed.stream(i, r)`.
/// `sigma[i]` supplies the stratum spreads the `neyman` policy needs.
pub fn estimate_game<G: Game>(
    oracle: &ValueOracle<G>,
    spec: PolicySpec,
    budget: usize,
    seed: RngSeed,
    repetition: u64,
    sigma: Option<&[Vec<f64>]>,
    exec: Execution,
) -> Result<EstimatorReport> {
    let n = oracle.n();
    if let Some(sig) = sigma {
        if sig.len() != n {
            return Err(ShapleyError::DimensionMismatch {
                expected: n,
                actual: sig.len(),
            });
        }
    }
    let grand = oracle.evaluate(&Coalition::full(n))?;
    let players = exec.try_map(n, |i| {
        let policy = spec.instantiate(n, budget, sigma.map(|s| s[i].as_slice()))?;
        let mut rng = seed.stream(i, repetition);
        stratified_estimate(oracle, PlayerId(i), &policy, budget, &mut rng)
    })?;
    let t: Vec<f64> = players.iter().map(|p| p.t).collect();
    let var_t: Vec<f64> = players.iter().map(|p| p.var_t).collect();
    let phi_hat = mle_budget_balance(&t, &var_t, grand)?;
    Ok(EstimatorReport {
        policy: spec.name(),
        samples_per_player: budget,
        seed: seed.0,
        repetition,
        budget: grand,
        samples_used: players.iter().map(|p| p.samples).collect(),
        strata: players.into_iter().map(|p| p.strata).collect(),
        t,
        var_t,
        phi_hat,
    })
}

/// Uniform permutation sampling: each of `budget` random orderings yields
/// one marginal contribution for every player from a single prefix scan
/// (`n + 1` evaluations). Returns per-player sample means.
pub fn uniform_permutation_estimate<G: Game, R: Rng + ?Sized>(
    oracle: &ValueOracle<G>,
    budget: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if budget < 1 {
        return Err(ShapleyError::InvalidParameter(
            "sample budget must be >= 1".into(),
        ));
    }
    let n = oracle.n();
    let mut sums = vec![NeumaierSum::new(); n];
    let mut prefix = Coalition::empty(n);
    for _ in 0..budget {
        let order = crate::sampling::random_permutation(n, rng);
        prefix.clear();
        let mut prev = oracle.evaluate_unchecked(&prefix);
        for &k in &order {
            prefix.insert(k);
            let cur = oracle.evaluate_unchecked(&prefix);
            sums[k].add(cur - prev);
            prev = cur;
        }
    }
    Ok(sums.iter().map(|s| s.value() / budget as f64).collect())
}
