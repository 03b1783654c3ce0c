//! Reserve-provision game: participants promise load reductions, and the
//! operator is penalized when the aggregate shortfall exceeds its leeway.

use rand::distributions::{Distribution, Uniform};

use crate::coalition::Coalition;
use crate::error::{Result, ShapleyError};
use crate::game::Game;
use crate::sampling::RngSeed;

/// `v(S) = -q [Σ_{i∈S} ΔX_i - ΔM]_+`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReserveGame {
    delta_x: Vec<f64>,
    delta_m: f64,
    q: f64,
}

impl ReserveGame {
    pub fn new(delta_x: Vec<f64>, delta_m: f64, q: f64) -> Result<Self> {
        if !delta_m.is_finite() || delta_m < 0.0 {
            return Err(ShapleyError::InvalidParameter(format!(
                "leeway must be finite and >= 0, got {delta_m}"
            )));
        }
        if !q.is_finite() || q <= 0.0 {
            return Err(ShapleyError::InvalidParameter(format!(
                "penalty rate must be finite and > 0, got {q}"
            )));
        }
        if let Some(bad) = delta_x.iter().find(|x| !x.is_finite()) {
            return Err(ShapleyError::InvalidParameter(format!(
                "non-finite discrepancy {bad}"
            )));
        }
        Ok(ReserveGame {
            delta_x,
            delta_m,
            q,
        })
    }

    /// Penalty rate `q = 1`.
    pub fn unit_rate(delta_x: Vec<f64>, delta_m: f64) -> Result<Self> {
        Self::new(delta_x, delta_m, 1.0)
    }

    pub fn delta_x(&self) -> &[f64] {
        &self.delta_x
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    fn penalty(&self, aggregate: f64) -> f64 {
        -self.q * (aggregate - self.delta_m).max(0.0)
    }
}

impl Game for ReserveGame {
    fn n_players(&self) -> usize {
        self.delta_x.len()
    }

    fn value(&self, s: &Coalition) -> f64 {
        let total: f64 = s.iter().map(|k| self.delta_x[k]).sum();
        self.penalty(total)
    }

    // Single pass producing both sums in the same ascending order `value`
    // would use, so the result is bit-identical to the default.
    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        let mut without = 0.0;
        let mut with = 0.0;
        let mut pending = true;
        for k in s.iter() {
            if pending && k > i {
                with += self.delta_x[i];
                pending = false;
            }
            without += self.delta_x[k];
            with += self.delta_x[k];
        }
        if pending {
            with += self.delta_x[i];
        }
        self.penalty(with) - self.penalty(without)
    }
}

/// Population with `ΔX_i ~ U[lo, hi]` drawn from the seed's root stream.
pub fn gen_reserve_population(
    n: usize,
    lo: f64,
    hi: f64,
    delta_m: f64,
    seed: RngSeed,
) -> Result<ReserveGame> {
    if n == 0 {
        return Err(ShapleyError::InvalidParameter("n must be >= 1".into()));
    }
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return Err(ShapleyError::InvalidParameter(format!(
            "invalid discrepancy range [{lo}, {hi}]"
        )));
    }
    let mut rng = seed.rng();
    let delta_x = if lo == hi {
        vec![lo; n]
    } else {
        let dist = Uniform::new_inclusive(lo, hi);
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    };
    ReserveGame::unit_rate(delta_x, delta_m)
}

/// The standard benchmark: `ΔX_i ~ U[0.7, 0.8]` and a leeway of
/// `0.75 (n/2 + 1)`, which leaves the lower half of the strata with zero
/// mean and zero spread and only a narrow band of strata near the
/// threshold with any variability.
pub fn reserve_benchmark(n: usize, seed: RngSeed) -> Result<ReserveGame> {
    let delta_m = 0.75 * (n as f64 / 2.0 + 1.0);
    gen_reserve_population(n, 0.7, 0.8, delta_m, seed)
}
