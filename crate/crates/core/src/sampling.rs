//! Seeded random streams and uniform coalition draws.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coalition::{Coalition, PlayerId};
use crate::error::{Result, ShapleyError};

/// The generator used everywhere randomness is needed.
pub type SampleRng = ChaCha8Rng;

/// Master seed for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// The generator for the root stream (population generation and other
    /// one-off draws).
    pub fn rng(self) -> SampleRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// An independent stream for one `(player, repetition)` pair.
    ///
    /// Streams depend only on the seed and the pair, never on which worker
    /// runs them, so parallel runs are reproducible.
    pub fn stream(self, player: usize, repetition: u64) -> SampleRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(((repetition + 1) << 32) | player as u64);
        rng
    }

    /// A labelled auxiliary stream, disjoint from every `stream(..)`.
    pub fn aux(self, label: u32) -> SampleRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(label as u64);
        rng
    }

    /// Derives a child seed, e.g. for a population generated inside a sweep.
    pub fn derive(self, label: u32) -> RngSeed {
        RngSeed(self.aux(0x8000_0000 | label).gen())
    }
}

/// Draws uniform size-`j` subsets of `X \ {i}` by partial Fisher–Yates
/// shuffles over a reusable candidate buffer.
#[derive(Debug, Clone)]
pub struct CoalitionSampler {
    n: usize,
    player: usize,
    candidates: Vec<usize>,
}

impl CoalitionSampler {
    pub fn new(n: usize, player: PlayerId) -> Result<Self> {
        if player.index() >= n {
            return Err(ShapleyError::PlayerOutOfRange {
                player: player.index(),
                n,
            });
        }
        let candidates = (0..n).filter(|&k| k != player.index()).collect();
        Ok(CoalitionSampler {
            n,
            player: player.index(),
            candidates,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    /// Overwrites `out` with a uniformly random size-`j` subset of `X \ {i}`.
    ///
    /// The buffer is left permuted between calls; a partial shuffle of any
    /// fixed arrangement is still uniform, so no reset is needed.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R, out: &mut Coalition) {
        debug_assert!(j < self.n);
        let (chosen, _) = self.candidates.partial_shuffle(rng, j);
        out.clear();
        for &k in chosen.iter() {
            out.insert(k);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<Coalition> {
        if j >= self.n {
            return Err(ShapleyError::StratumOutOfRange {
                size: j,
                max: self.n.saturating_sub(1),
            });
        }
        let mut out = Coalition::empty(self.n);
        self.sample_into(j, rng, &mut out);
        Ok(out)
    }
}

/// A uniformly random size-`j` subset of the players other than `i`.
pub fn sample_coalition_of_size<R: Rng + ?Sized>(
    n: usize,
    i: PlayerId,
    j: usize,
    rng: &mut R,
) -> Result<Coalition> {
    CoalitionSampler::new(n, i)?.sample(j, rng)
}

/// A uniformly random ordering of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn two_player_strata_are_forced() {
        let mut rng = RngSeed(1).rng();
        let s0 = sample_coalition_of_size(2, PlayerId(0), 0, &mut rng).unwrap();
        assert!(s0.is_empty());
        let s1 = sample_coalition_of_size(2, PlayerId(0), 1, &mut rng).unwrap();
        assert_eq!(s1.iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn rejects_oversized_stratum() {
        let mut rng = RngSeed(1).rng();
        assert_eq!(
            sample_coalition_of_size(3, PlayerId(0), 3, &mut rng),
            Err(ShapleyError::StratumOutOfRange { size: 3, max: 2 })
        );
        assert!(sample_coalition_of_size(3, PlayerId(3), 0, &mut rng).is_err());
    }

    #[test]
    fn size_two_of_five_is_uniform() {
        // 6 subsets of {1,2,3,4}; chi-square with 5 dof, p = 0.01 critical value 15.086
        let mut sampler = CoalitionSampler::new(5, PlayerId(0)).unwrap();
        let mut rng = RngSeed(2024).rng();
        let draws = 60_000;
        let mut counts: HashMap<Vec<usize>, u32> = HashMap::new();
        for _ in 0..draws {
            let s = sampler.sample(2, &mut rng).unwrap();
            assert!(!s.contains(0));
            *counts.entry(s.iter().collect()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 15.086, "chi2 = {chi2}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let seed = RngSeed(99);
        let a: Vec<u64> = (0..4).map(|_| seed.stream(3, 7).gen()).collect();
        let b: Vec<u64> = (0..4).map(|_| seed.stream(3, 7).gen()).collect();
        assert_eq!(a, b);
        let x: u64 = seed.stream(3, 7).gen();
        let y: u64 = seed.stream(4, 7).gen();
        let z: u64 = seed.stream(3, 8).gen();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = RngSeed(5).rng();
        let mut p = random_permutation(50, &mut rng);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
