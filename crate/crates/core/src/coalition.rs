//! Dense bit-set coalitions over zero-indexed players.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Zero-based participant index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayerId(pub usize);

impl PlayerId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for PlayerId {
    fn from(i: usize) -> Self {
        PlayerId(i)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const WORD_BITS: usize = 64;

/// A subset of the players `0..n`, stored as a fixed-width bit set.
///
/// Two coalitions over the same `n` with the same members always have the
/// same word vector, so the words double as the canonical cache key.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    n: usize,
    words: Vec<u64>,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Coalition {
            n,
            words: vec![0; n.div_ceil(WORD_BITS)],
        }
    }

    /// The grand coalition containing all `n` players.
    pub fn full(n: usize) -> Self {
        let mut c = Coalition::empty(n);
        for w in c.words.iter_mut() {
            *w = u64::MAX;
        }
        let tail = n % WORD_BITS;
        if tail != 0 {
            if let Some(last) = c.words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        c
    }

    /// Builds a coalition from player indices; duplicates collapse.
    ///
    /// Panics if an index is `>= n`.
    pub fn from_members<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Self {
        let mut c = Coalition::empty(n);
        for i in members {
            c.insert(i);
        }
        c
    }

    /// Coalition whose membership is the low `n` bits of `mask`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= WORD_BITS);
        let mut c = Coalition::empty(n);
        if n > 0 {
            let keep = if n == WORD_BITS {
                u64::MAX
            } else {
                (1u64 << n) - 1
            };
            c.words[0] = mask & keep;
        }
        c
    }

    /// Number of players in the enclosing game.
    #[inline]
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / WORD_BITS] & (1u64 << (i % WORD_BITS)) != 0
    }

    /// Adds player `i`; returns `true` if it was not already present.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.n, "player {i} out of range for n = {}", self.n);
        let w = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    /// Removes player `i`; returns `true` if it was present.
    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.n {
            return false;
        }
        let w = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn clear(&mut self) {
        for w in self.words.iter_mut() {
            *w = 0;
        }
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Returns `self ∪ {i}` as a new coalition.
    pub fn with(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.insert(i);
        c
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Members<'_> {
        Members {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// Canonical little-endian byte encoding of the membership bits.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Ascending iterator over coalition members.
pub struct Members<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD_BITS + tz);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

impl<'a> IntoIterator for &'a Coalition {
    type Item = usize;
    type IntoIter = Members<'a>;

    fn into_iter(self) -> Members<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_cardinality() {
        let mut c = Coalition::empty(130);
        assert!(c.is_empty());
        assert!(c.insert(0));
        assert!(c.insert(64));
        assert!(c.insert(129));
        assert!(!c.insert(64));
        assert_eq!(c.cardinality(), 3);
        assert!(c.contains(129));
        assert!(!c.contains(128));
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert!(c.remove(64));
        assert!(!c.remove(64));
        assert_eq!(c.cardinality(), 2);
    }

    #[test]
    fn full_coalition_has_exactly_n_members() {
        for n in [0, 1, 63, 64, 65, 1024] {
            let c = Coalition::full(n);
            assert_eq!(c.cardinality(), n);
            assert_eq!(c.iter().count(), n);
        }
    }

    #[test]
    fn insertion_order_does_not_change_encoding() {
        let a = Coalition::from_members(10, [3, 1, 7]);
        let b = Coalition::from_members(10, [7, 3, 1, 1]);
        assert_eq!(a, b);
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    }

    #[test]
    fn subset_relation() {
        let a = Coalition::from_members(8, [1, 2]);
        let b = Coalition::from_members(8, [1, 2, 5]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }

    #[test]
    fn mask_roundtrip() {
        let c = Coalition::from_mask(5, 0b10110);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(Coalition::from_mask(3, u64::MAX).cardinality(), 3);
    }
}
