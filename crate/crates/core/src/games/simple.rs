use crate::coalition::Coalition;
use crate::game::Game;

/// `v(S) = Σ_{k∈S} w_k`.
#[derive(Debug, Clone)]
pub struct AdditiveGame {
    weights: Vec<f64>,
}

impl AdditiveGame {
    pub fn new(weights: Vec<f64>) -> Self {
        AdditiveGame { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Game for AdditiveGame {
    fn n_players(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Coalition) -> f64 {
        s.iter().map(|k| self.weights[k]).sum()
    }
}

/// `v(S) = c` for every coalition, including the empty one.
#[derive(Debug, Clone)]
pub struct ConstantGame {
    n: usize,
    c: f64,
}

impl ConstantGame {
    pub fn new(n: usize, c: f64) -> Self {
        ConstantGame { n, c }
    }
}

impl Game for ConstantGame {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, _s: &Coalition) -> f64 {
        self.c
    }
}

/// `v(S) = 1` iff `|S| >= quota`.
#[derive(Debug, Clone)]
pub struct MajorityGame {
    n: usize,
    quota: usize,
}

impl MajorityGame {
    pub fn new(n: usize, quota: usize) -> Self {
        MajorityGame { n, quota }
    }
}

impl Game for MajorityGame {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Coalition) -> f64 {
        if s.cardinality() >= self.quota {
            1.0
        } else {
            0.0
        }
    }
}

/// `v(S) = 1` iff `S` contains every player of the carrier (e.g. the
/// two-player glove game with carrier `{0, 1}`).
#[derive(Debug, Clone)]
pub struct UnanimityGame {
    carrier: Coalition,
}

impl UnanimityGame {
    pub fn new(n: usize, carrier: &[usize]) -> Self {
        UnanimityGame {
            carrier: Coalition::from_members(n, carrier.iter().copied()),
        }
    }
}

impl Game for UnanimityGame {
    fn n_players(&self) -> usize {
        self.carrier.universe()
    }

    fn value(&self, s: &Coalition) -> f64 {
        if self.carrier.is_subset_of(s) {
            1.0
        } else {
            0.0
        }
    }
}
