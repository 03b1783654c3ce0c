//! Deferrable-load following: the operator delays the loads of a
//! coalition so that their aggregate tracks a target profile.
//!
//! Loads are committed greedily in ascending participant order. Each load
//! takes the delay in `0..=max_delay` that maximizes
//! `(|y|^2 - |y - s|^2) / T` given the loads already committed; ties go to
//! the smallest delay. A delay shifts the profile later in the day and any
//! energy pushed past the last slot is dropped.

use rand::Rng;

use crate::coalition::Coalition;
use crate::error::{Result, ShapleyError};
use crate::game::Game;
use crate::sampling::RngSeed;

/// Slots per day for hourly profiles.
pub const HORIZON: usize = 24;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LoadProfile {
    pub id: u64,
    pub demand: Vec<f64>,
    pub max_delay: usize,
}

impl LoadProfile {
    pub fn new(id: u64, demand: Vec<f64>, max_delay: usize) -> Result<Self> {
        if let Some((h, x)) = demand
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(ShapleyError::InvalidParameter(format!(
                "load {id}: demand at slot {h} must be finite and >= 0, got {x}"
            )));
        }
        if !demand.is_empty() && max_delay >= demand.len() {
            return Err(ShapleyError::InvalidParameter(format!(
                "load {id}: max_delay {max_delay} must be < horizon {}",
                demand.len()
            )));
        }
        Ok(LoadProfile {
            id,
            demand,
            max_delay,
        })
    }

    pub fn horizon(&self) -> usize {
        self.demand.len()
    }

    /// The profile delayed by `d` slots, truncated at the horizon.
    pub fn shifted(&self, d: usize) -> Vec<f64> {
        let t = self.horizon();
        let mut out = vec![0.0; t];
        if d < t {
            out[d..].copy_from_slice(&self.demand[..t - d]);
        }
        out
    }
}

/// Outcome of scheduling one coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Aggregate profile `s` after all loads are placed.
    pub aggregate: Vec<f64>,
    /// `(player, delay)` in commit order.
    pub delays: Vec<(usize, usize)>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct LoadFollowGame {
    profiles: Vec<LoadProfile>,
    target: Vec<f64>,
    target_sq: f64,
    /// Non-zero `(slot, kWh)` entries per profile.
    support: Vec<Vec<(usize, f64)>>,
}

impl LoadFollowGame {
    pub fn new(profiles: Vec<LoadProfile>, target: Vec<f64>) -> Result<Self> {
        let t = target.len();
        if t == 0 {
            return Err(ShapleyError::InvalidParameter(
                "empty target profile".into(),
            ));
        }
        if let Some(x) = target.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(ShapleyError::InvalidParameter(format!(
                "target entries must be finite and >= 0, got {x}"
            )));
        }
        for p in &profiles {
            if p.horizon() != t {
                return Err(ShapleyError::DimensionMismatch {
                    expected: t,
                    actual: p.horizon(),
                });
            }
        }
        let support = profiles
            .iter()
            .map(|p| {
                p.demand
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(h, &x)| (h, x))
                    .collect()
            })
            .collect();
        let target_sq = target.iter().map(|y| y * y).sum();
        Ok(LoadFollowGame {
            profiles,
            target,
            target_sq,
            support,
        })
    }

    pub fn profiles(&self) -> &[LoadProfile] {
        &self.profiles
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn horizon(&self) -> usize {
        self.target.len()
    }

    /// `|y|^2 / T`, the largest value any coalition can reach.
    pub fn max_value(&self) -> f64 {
        self.target_sq / self.horizon() as f64
    }

    /// Runs the greedy scheduler on `s` and returns the placement.
    pub fn greedy_schedule(&self, s: &Coalition) -> Result<Schedule> {
        if s.universe() != self.profiles.len() {
            return Err(ShapleyError::DimensionMismatch {
                expected: self.profiles.len(),
                actual: s.universe(),
            });
        }
        let mut residual = self.target.clone();
        let mut delays = Vec::with_capacity(s.cardinality());
        for k in s.iter() {
            let d = self.commit(k, &mut residual);
            delays.push((k, d));
        }
        let aggregate = self
            .target
            .iter()
            .zip(&residual)
            .map(|(y, r)| y - r)
            .collect();
        Ok(Schedule {
            aggregate,
            delays,
            value: self.value_of(&residual),
        })
    }

    /// Places load `k` against the residual `y - s`, updates the residual
    /// and returns the chosen delay.
    #[inline]
    fn commit(&self, k: usize, residual: &mut [f64]) -> usize {
        let t = residual.len();
        let support = &self.support[k];
        let max_delay = self.profiles[k].max_delay;
        // Adding x_d changes |r|^2 by -Σ x (2r - x); maximize that decrease.
        let score = |d: usize, residual: &[f64]| -> f64 {
            support
                .iter()
                .filter(|(h, _)| h + d < t)
                .map(|&(h, x)| x * (2.0 * residual[h + d] - x))
                .sum()
        };
        let mut best_d = 0;
        let mut best = score(0, residual);
        for d in 1..=max_delay {
            let sc = score(d, residual);
            if sc > best {
                best = sc;
                best_d = d;
            }
        }
        debug_assert!((0..=max_delay).all(|d| score(d, residual) <= best));
        for &(h, x) in support {
            if h + best_d < t {
                residual[h + best_d] -= x;
            }
        }
        best_d
    }

    #[inline]
    fn value_of(&self, residual: &[f64]) -> f64 {
        let miss: f64 = residual.iter().map(|r| r * r).sum();
        (self.target_sq - miss) / self.horizon() as f64
    }
}

impl Game for LoadFollowGame {
    fn n_players(&self) -> usize {
        self.profiles.len()
    }

    fn value(&self, s: &Coalition) -> f64 {
        let mut residual = self.target.clone();
        for k in s.iter() {
            self.commit(k, &mut residual);
        }
        self.value_of(&residual)
    }

    // Loads below `i` are placed identically with or without `i`, so that
    // prefix is scheduled once.
    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        let mut residual = self.target.clone();
        let mut members = s.iter().peekable();
        while let Some(&k) = members.peek() {
            if k > i {
                break;
            }
            self.commit(k, &mut residual);
            members.next();
        }
        let mut with = residual.clone();
        self.commit(i, &mut with);
        for k in members {
            self.commit(k, &mut residual);
            self.commit(k, &mut with);
        }
        self.value_of(&with) - self.value_of(&residual)
    }
}

/// Parameters for synthetic load populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadPopulationConfig {
    pub n: usize,
    pub horizon: usize,
    /// Each load's `max_delay` is drawn from `0..=max_delay_cap`.
    pub max_delay_cap: usize,
}

impl LoadPopulationConfig {
    pub fn new(n: usize) -> Self {
        LoadPopulationConfig {
            n,
            horizon: HORIZON,
            max_delay_cap: 6,
        }
    }
}

/// Synthetic population of rectangular and bimodal daily loads.
///
/// The target is the aggregate of an independently re-delayed copy of the
/// same population, so the grand coalition can get close to it.
pub fn gen_load_population(config: LoadPopulationConfig, seed: RngSeed) -> Result<LoadFollowGame> {
    let LoadPopulationConfig {
        n,
        horizon,
        max_delay_cap,
    } = config;
    if n == 0 {
        return Err(ShapleyError::InvalidParameter("n must be >= 1".into()));
    }
    if horizon < 8 {
        return Err(ShapleyError::InvalidParameter(format!(
            "horizon must be >= 8 slots, got {horizon}"
        )));
    }
    let max_delay_cap = max_delay_cap.min(horizon - 1);
    let mut rng = seed.rng();
    let mut profiles = Vec::with_capacity(n);
    for id in 0..n {
        let mut demand = vec![0.0; horizon];
        if rng.gen_bool(0.5) {
            let len = rng.gen_range(1..=6.min(horizon));
            let start = rng.gen_range(0..=horizon - len);
            let kw = rng.gen_range(0.2..2.0);
            demand[start..start + len].iter_mut().for_each(|x| *x = kw);
        } else {
            // morning and evening bumps, placed proportionally to the horizon
            let scale = horizon as f64 / HORIZON as f64;
            for (lo, hi) in [(5.0, 9.0), (16.0, 20.0)] {
                let start = rng.gen_range((lo * scale) as usize..=(hi * scale) as usize);
                let len = rng.gen_range(1..=3);
                let kw = rng.gen_range(0.2..1.5);
                let end = (start + len).min(horizon);
                demand[start..end].iter_mut().for_each(|x| *x += kw);
            }
        }
        let max_delay = rng.gen_range(0..=max_delay_cap);
        profiles.push(LoadProfile::new(id as u64, demand, max_delay)?);
    }
    let mut target = vec![0.0; horizon];
    for p in &profiles {
        let d = rng.gen_range(0..=p.max_delay);
        for (y, x) in target.iter_mut().zip(p.shifted(d)) {
            *y += x;
        }
    }
    LoadFollowGame::new(profiles, target)
}
