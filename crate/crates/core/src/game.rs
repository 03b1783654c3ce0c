//! The value-oracle abstraction: a cooperative game plus evaluation
//! accounting and optional memoization.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use lru::LruCache;

use crate::coalition::{Coalition, PlayerId};
use crate::error::{Result, ShapleyError};

/// A transferable-utility game `v: 2^X -> R`.
///
/// Implementations must be deterministic and safe to evaluate from many
/// workers at once.
pub trait Game: Send + Sync {
    fn n_players(&self) -> usize;

    /// `v(S)`. Callers guarantee `s.universe() == self.n_players()`.
    fn value(&self, s: &Coalition) -> f64;

    /// `v(S ∪ {i}) - v(S)` for `i ∉ S`.
    ///
    /// Games may override this with a cheaper route, but the result must be
    /// bit-identical to the two-evaluation default.
    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        let with = s.with(i);
        self.value(&with) - self.value(s)
    }
}

impl<G: Game + ?Sized> Game for &G {
    fn n_players(&self) -> usize {
        (**self).n_players()
    }
    fn value(&self, s: &Coalition) -> f64 {
        (**self).value(s)
    }
    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        (**self).marginal(i, s)
    }
}

impl<G: Game + ?Sized> Game for Box<G> {
    fn n_players(&self) -> usize {
        (**self).n_players()
    }
    fn value(&self, s: &Coalition) -> f64 {
        (**self).value(s)
    }
    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        (**self).marginal(i, s)
    }
}

/// A game wrapped with an evaluation counter and an optional LRU cache.
///
/// `eval_count` counts calls that reached the underlying game; cache hits
/// are not counted.
pub struct ValueOracle<G> {
    game: G,
    evals: AtomicU64,
    cache: Option<Mutex<LruCache<Vec<u64>, f64>>>,
}

impl<G: Game> ValueOracle<G> {
    pub fn new(game: G) -> Self {
        ValueOracle {
            game,
            evals: AtomicU64::new(0),
            cache: None,
        }
    }

    /// Oracle that memoizes up to `capacity` coalition values, evicting the
    /// least recently used entry.
    pub fn with_cache(game: G, capacity: usize) -> Result<Self> {
        let cap = NonZeroUsize::new(capacity)
            .ok_or_else(|| ShapleyError::InvalidParameter("cache capacity must be > 0".into()))?;
        Ok(ValueOracle {
            game,
            evals: AtomicU64::new(0),
            cache: Some(Mutex::new(LruCache::new(cap))),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.game.n_players()
    }

    pub fn game(&self) -> &G {
        &self.game
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn cache_len(&self) -> usize {
        self.cache
            .as_ref()
            .map(|c| c.lock().expect("cache lock poisoned").len())
            .unwrap_or(0)
    }

    fn check_coalition(&self, s: &Coalition) -> Result<()> {
        if s.universe() != self.n() {
            return Err(ShapleyError::DimensionMismatch {
                expected: self.n(),
                actual: s.universe(),
            });
        }
        Ok(())
    }

    /// `v(S)`, served from the cache when one is configured.
    pub fn evaluate(&self, s: &Coalition) -> Result<f64> {
        self.check_coalition(s)?;
        Ok(self.evaluate_unchecked(s))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, s: &Coalition) -> f64 {
        debug_assert_eq!(s.universe(), self.n());
        match &self.cache {
            None => {
                self.evals.fetch_add(1, Ordering::Relaxed);
                self.game.value(s)
            }
            Some(cache) => {
                let key = s.words().to_vec();
                if let Some(&v) = cache.lock().expect("cache lock poisoned").get(&key) {
                    return v;
                }
                self.evals.fetch_add(1, Ordering::Relaxed);
                let v = self.game.value(s);
                cache.lock().expect("cache lock poisoned").put(key, v);
                v
            }
        }
    }

    /// `ρ_i(S) = v(S ∪ {i}) - v(S)`.
    pub fn marginal_contribution(&self, i: PlayerId, s: &Coalition) -> Result<f64> {
        self.check_coalition(s)?;
        if i.index() >= self.n() {
            return Err(ShapleyError::PlayerOutOfRange {
                player: i.index(),
                n: self.n(),
            });
        }
        if s.contains(i.index()) {
            return Err(ShapleyError::PlayerInCoalition(i.index()));
        }
        Ok(self.marginal_unchecked(i.index(), s))
    }

    #[inline]
    pub(crate) fn marginal_unchecked(&self, i: usize, s: &Coalition) -> f64 {
        debug_assert!(!s.contains(i));
        if self.cache.is_some() {
            let with = s.with(i);
            self.evaluate_unchecked(&with) - self.evaluate_unchecked(s)
        } else {
            self.evals.fetch_add(2, Ordering::Relaxed);
            self.game.marginal(i, s)
        }
    }
}
