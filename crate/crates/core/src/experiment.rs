//! Repeated-run experiments built on the estimator: variance-vs-budget
//! curves, regret against ideal allocation, MSPE tables and the
//! stratification benefit check.
//!
//! Repetition `r` of player `i` always uses `seed.stream(i, r)`, whatever
//! the policy, so policies are compared on paired streams.

use serde::{Deserialize, Serialize};

use crate::coalition::PlayerId;
use crate::error::{Result, ShapleyError};
use crate::estimator::{mle_budget_balance, stratified_estimate};
use crate::game::{Game, ValueOracle};
use crate::numeric::{mean, sample_variance, NeumaierSum};
use crate::parallel::Execution;
use crate::policy::PolicySpec;
use crate::sampling::RngSeed;
use crate::variance::{
    analytic_var_es, analytic_var_rs, analytic_var_sd, benefit_ratio, exhaustive_profile,
    pilot_profile, StrataProfile, EXHAUSTIVE_PROFILE_CAP,
};

/// Ratios below this mean equal allocation is about as good as ideal.
pub const BENEFIT_THRESHOLD: f64 = 1.2;

/// Where stratum profiles come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSource {
    /// Complete enumeration; only for small games.
    Exhaustive,
    /// Equal-allocation pilot with this many samples per stratum.
    Pilot { per_stratum: usize },
    /// Exhaustive up to [`EXHAUSTIVE_PROFILE_CAP`] players, pilot beyond.
    Auto { per_stratum: usize },
}

/// One profile per player.
pub fn strata_profiles<G: Game>(
    oracle: &ValueOracle<G>,
    source: ProfileSource,
    seed: RngSeed,
    exec: Execution,
) -> Result<Vec<StrataProfile>> {
    let n = oracle.n();
    let source = match source {
        ProfileSource::Auto { per_stratum } if n > EXHAUSTIVE_PROFILE_CAP => {
            ProfileSource::Pilot { per_stratum }
        }
        ProfileSource::Auto { .. } => ProfileSource::Exhaustive,
        other => other,
    };
    exec.try_map(n, |i| match source {
        ProfileSource::Pilot { per_stratum } => {
            let mut rng = seed.aux(0x1000_0000 | i as u32);
            pilot_profile(oracle, PlayerId(i), per_stratum, &mut rng)
        }
        _ => exhaustive_profile(oracle, PlayerId(i), EXHAUSTIVE_PROFILE_CAP),
    })
}

pub fn sigma_table(profiles: &[StrataProfile]) -> Vec<Vec<f64>> {
    profiles.iter().map(|p| p.sigma.clone()).collect()
}

/// Per-player outcome of one repetition, without stratum detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub t: Vec<f64>,
    pub var_t: Vec<f64>,
    pub phi_hat: Vec<f64>,
}

/// Runs `reps` independent estimates of every player.
///
/// Work is spread over `(repetition, player)` pairs and reassembled in
/// repetition order.
pub fn run_repetitions<G: Game>(
    oracle: &ValueOracle<G>,
    spec: PolicySpec,
    budget: usize,
    seed: RngSeed,
    reps: usize,
    sigma: Option<&[Vec<f64>]>,
    exec: Execution,
) -> Result<Vec<RepetitionSummary>> {
    let n = oracle.n();
    if reps == 0 {
        return Err(ShapleyError::InvalidParameter(
            "repetitions must be >= 1".into(),
        ));
    }
    if spec.needs_sigma() && sigma.map(|s| s.len()) != Some(n) {
        return Err(ShapleyError::InvalidParameter(
            "neyman policy requires one sigma vector per player".into(),
        ));
    }
    let grand = oracle.evaluate(&crate::coalition::Coalition::full(n))?;
    let cells = exec.try_map(reps * n, |k| {
        let (rep, i) = (k / n, k % n);
        let policy = spec.instantiate(n, budget, sigma.map(|s| s[i].as_slice()))?;
        let mut rng = seed.stream(i, rep as u64);
        let est = stratified_estimate(oracle, PlayerId(i), &policy, budget, &mut rng)?;
        Ok::<_, ShapleyError>((est.t, est.var_t))
    })?;
    cells
        .chunks(n)
        .map(|row| {
            let t: Vec<f64> = row.iter().map(|c| c.0).collect();
            let var_t: Vec<f64> = row.iter().map(|c| c.1).collect();
            let phi_hat = mle_budget_balance(&t, &var_t, grand)?;
            Ok(RepetitionSummary { t, var_t, phi_hat })
        })
        .collect()
}

/// Sample variance of `T_i` across repetitions, per player.
pub fn empirical_variances(runs: &[RepetitionSummary]) -> Vec<f64> {
    let n = runs.first().map(|r| r.t.len()).unwrap_or(0);
    (0..n)
        .map(|i| {
            let xs: Vec<f64> = runs.iter().map(|r| r.t[i]).collect();
            sample_variance(&xs)
        })
        .collect()
}

/// Mean squared prediction error over repetitions and players.
pub fn mspe(estimates: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    if estimates.is_empty() || truth.is_empty() {
        return Err(ShapleyError::InvalidParameter("empty MSPE input".into()));
    }
    let mut acc = NeumaierSum::new();
    for row in estimates {
        if row.len() != truth.len() {
            return Err(ShapleyError::DimensionMismatch {
                expected: truth.len(),
                actual: row.len(),
            });
        }
        acc.extend(row.iter().zip(truth).map(|(e, t)| (t - e) * (t - e)));
    }
    Ok(acc.value() / (estimates.len() * truth.len()) as f64)
}

/// Closed-form variance a policy should reach; the adaptive policy is
/// measured against the ideal it approximates.
pub fn analytic_variance(spec: PolicySpec, profile: &StrataProfile, budget: usize) -> Result<f64> {
    let b = budget as f64;
    match spec {
        PolicySpec::Random => analytic_var_rs(profile, b),
        PolicySpec::Equal => analytic_var_es(profile, b),
        PolicySpec::Neyman | PolicySpec::Sigmoid { .. } => analytic_var_sd(profile, b),
    }
}

fn mean_analytic(
    profiles: &[StrataProfile],
    budget: usize,
    f: impl Fn(&StrataProfile, f64) -> Result<f64>,
) -> Result<f64> {
    let vals = profiles
        .iter()
        .map(|p| f(p, budget as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub policy: String,
    pub samples: usize,
    /// Player-averaged sample variance of `T_i` over the repetitions.
    pub empirical_var: f64,
    /// Player-averaged closed-form variance for the policy.
    pub analytic_var: f64,
}

fn check_grid(grid: &[usize], n: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(ShapleyError::InvalidParameter(
            "empty sample-size grid".into(),
        ));
    }
    if let Some(&b) = grid.iter().find(|&&b| b < n) {
        return Err(ShapleyError::InvalidParameter(format!(
            "sample budget {b} is below the player count {n}"
        )));
    }
    Ok(())
}

/// Empirical and closed-form variance of the statistic for each policy
/// and budget.
pub fn variance_curve<G: Game>(
    oracle: &ValueOracle<G>,
    policies: &[PolicySpec],
    grid: &[usize],
    reps: usize,
    seed: RngSeed,
    profiles: &[StrataProfile],
    exec: Execution,
) -> Result<Vec<CurvePoint>> {
    check_grid(grid, oracle.n())?;
    let sigma = sigma_table(profiles);
    let mut out = Vec::new();
    for &spec in policies {
        for &budget in grid {
            let runs = run_repetitions(oracle, spec, budget, seed, reps, Some(&sigma), exec)?;
            let analytic =
                mean_analytic(profiles, budget, |p, _| analytic_variance(spec, p, budget))?;
            out.push(CurvePoint {
                policy: spec.name(),
                samples: budget,
                empirical_var: mean(&empirical_variances(&runs)),
                analytic_var: analytic,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub policy: String,
    pub samples: usize,
    /// Player-averaged variance of `T_i` achieved by the policy.
    pub variance: f64,
    /// Player-averaged variance under ideal σ-proportional allocation.
    pub ideal_variance: f64,
    pub regret: f64,
}

/// Excess variance of each policy over ideal allocation. The `neyman`
/// policy is the ideal itself and is reported with zero regret without
/// being simulated.
pub fn regret_curve<G: Game>(
    oracle: &ValueOracle<G>,
    policies: &[PolicySpec],
    grid: &[usize],
    reps: usize,
    seed: RngSeed,
    profiles: &[StrataProfile],
    exec: Execution,
) -> Result<Vec<RegretPoint>> {
    check_grid(grid, oracle.n())?;
    let mut out = Vec::new();
    for &spec in policies {
        for &budget in grid {
            let ideal = mean_analytic(profiles, budget, analytic_var_sd)?;
            let variance = if spec == PolicySpec::Neyman {
                ideal
            } else {
                let runs = run_repetitions(oracle, spec, budget, seed, reps, None, exec)?;
                mean(&empirical_variances(&runs))
            };
            out.push(RegretPoint {
                policy: spec.name(),
                samples: budget,
                variance,
                ideal_variance: ideal,
                regret: variance - ideal,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MspeRow {
    pub policy: String,
    pub mspe: f64,
    /// MSPE divided by the `neyman` row's.
    pub normalized: f64,
    /// Per-player mean squared error.
    pub per_player: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MspeReport {
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub truth: Vec<f64>,
    pub rows: Vec<MspeRow>,
}

impl MspeReport {
    pub fn row(&self, policy: &str) -> Option<&MspeRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

/// MSPE of the budget-balanced estimates for each policy, normalized by
/// the `neyman` policy (added if missing).
#[allow(clippy::too_many_arguments)]
pub fn mspe_table<G: Game>(
    oracle: &ValueOracle<G>,
    policies: &[PolicySpec],
    budget: usize,
    reps: usize,
    seed: RngSeed,
    truth: &[f64],
    profiles: &[StrataProfile],
    exec: Execution,
) -> Result<MspeReport> {
    let n = oracle.n();
    if truth.len() != n {
        return Err(ShapleyError::DimensionMismatch {
            expected: n,
            actual: truth.len(),
        });
    }
    let mut specs = policies.to_vec();
    if !specs.contains(&PolicySpec::Neyman) {
        specs.push(PolicySpec::Neyman);
    }
    let sigma = sigma_table(profiles);
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let runs = run_repetitions(oracle, spec, budget, seed, reps, Some(&sigma), exec)?;
        let estimates: Vec<Vec<f64>> = runs.into_iter().map(|r| r.phi_hat).collect();
        let per_player = (0..n)
            .map(|i| {
                let col: Vec<Vec<f64>> = estimates.iter().map(|e| vec![e[i]]).collect();
                mspe(&col, &truth[i..=i])
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(MspeRow {
            policy: spec.name(),
            mspe: mspe(&estimates, truth)?,
            normalized: 0.0,
            per_player,
        });
    }
    let baseline = rows
        .iter()
        .find(|r| r.policy == PolicySpec::Neyman.name())
        .map(|r| r.mspe)
        .unwrap_or(0.0);
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(ShapleyError::InvalidParameter(
            "neyman baseline MSPE is zero; normalization undefined".into(),
        ));
    }
    for r in rows.iter_mut() {
        r.normalized = r.mspe / baseline;
    }
    Ok(MspeReport {
        samples: budget,
        repetitions: reps,
        seed: seed.0,
        truth: truth.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitReport {
    /// Per-player `var_ES / var_SD`; `None` where every stratum is constant.
    pub per_player: Vec<Option<f64>>,
    /// Median over players with a defined ratio.
    pub ratio: f64,
    pub recommendation: String,
}

/// How much ideal allocation could gain over equal allocation, from
/// pilot estimates of the stratum spreads.
pub fn benefit<G: Game>(
    oracle: &ValueOracle<G>,
    per_stratum: usize,
    seed: RngSeed,
    exec: Execution,
) -> Result<BenefitReport> {
    let profiles = strata_profiles(oracle, ProfileSource::Pilot { per_stratum }, seed, exec)?;
    benefit_from_profiles(&profiles)
}

pub fn benefit_from_profiles(profiles: &[StrataProfile]) -> Result<BenefitReport> {
    let per_player: Vec<Option<f64>> = profiles.iter().map(|p| benefit_ratio(p).ok()).collect();
    let mut defined: Vec<f64> = per_player.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(ShapleyError::InvalidParameter(
            "benefit ratio undefined: no player has any stratum spread".into(),
        ));
    }
    defined.sort_by(f64::total_cmp);
    let m = defined.len();
    let ratio = if m % 2 == 1 {
        defined[m / 2]
    } else {
        0.5 * (defined[m / 2 - 1] + defined[m / 2])
    };
    let recommendation = if ratio < BENEFIT_THRESHOLD {
        "equal sampling adequate"
    } else {
        "adaptive allocation recommended"
    };
    Ok(BenefitReport {
        per_player,
        ratio,
        recommendation: recommendation.into(),
    })
}
