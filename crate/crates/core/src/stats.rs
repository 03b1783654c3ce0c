//! Online per-stratum statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapleyError};

/// Count, mean and sum of squared deviations for one `(player, stratum)`
/// pair, updated one sample at a time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StratumStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl StratumStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one sample. NaN is rejected.
    pub fn update(&mut self, x: f64) -> Result<()> {
        if x.is_nan() {
            return Err(ShapleyError::InvalidParameter("NaN sample".into()));
        }
        self.push(x);
        Ok(())
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Sample standard deviation `sqrt(m2 / (c - 1))`; zero below two samples.
    pub fn sigma(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.count - 1) as f64).sqrt()
        }
    }

    /// Sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2.max(0.0) / (self.count - 1) as f64
        }
    }

    /// Mean entering the stratified statistic: zero for an empty stratum.
    pub fn mean_or_zero(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.mean
        }
    }
}

/// Functional form of [`StratumStats::update`].
pub fn welford_update(stats: StratumStats, x: f64) -> Result<StratumStats> {
    let mut next = stats;
    next.update(x)?;
    Ok(next)
}
