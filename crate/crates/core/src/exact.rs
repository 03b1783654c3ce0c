//! Ground-truth Shapley values by exhaustive enumeration.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Result, ShapleyError};
use crate::game::{Game, ValueOracle};
use crate::numeric::NeumaierSum;
use crate::parallel::Execution;

/// Default player cap for the subset form (`2^n` evaluations).
pub const SUBSET_CAP: usize = 24;
/// Player cap for the permutation form (`n!` orderings).
pub const PERMUTATION_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactShapleyResult {
    pub phi: Vec<f64>,
    /// Oracle evaluations spent.
    pub evals: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `|S|! (n - |S| - 1)! / n!` for `|S| = 0..n`, via log-factorials.
pub fn subset_weights(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let lf = log_factorials(n);
    (0..n)
        .map(|j| (lf[j] + lf[n - j - 1] - lf[n]).exp())
        .collect()
}

/// Fills the table `v[mask]` for every coalition of `n <= 63` players.
fn value_table<G: Game>(oracle: &ValueOracle<G>) -> Vec<f64> {
    let n = oracle.n();
    (0u64..(1u64 << n))
        .map(|mask| oracle.evaluate_unchecked(&Coalition::from_mask(n, mask)))
        .collect()
}

/// Exact values from the subset form
/// `φ_i = Σ_{S ⊆ X\{i}} |S|!(n-|S|-1)!/n! · (v(S ∪ {i}) - v(S))`.
///
/// Every coalition is evaluated once into a table; per-player
/// accumulation then runs over players in parallel. Contributions are
/// summed per coalition size before weighting.
pub fn shapley_exact_subsets<G: Game>(
    oracle: &ValueOracle<G>,
    cap: usize,
    exec: Execution,
) -> Result<ExactShapleyResult> {
    let n = oracle.n();
    // the value table holds 2^n entries
    let cap = cap.min(32);
    if n > cap {
        return Err(ShapleyError::TooManyPlayers { n, cap });
    }
    let start = Instant::now();
    let before = oracle.eval_count();
    let table = value_table(oracle);
    let weights = subset_weights(n);
    let phi = exec.map(n, |i| {
        let bit = 1u64 << i;
        let mut by_size = vec![NeumaierSum::new(); n];
        for mask in 0u64..(1u64 << n) {
            if mask & bit == 0 {
                let j = mask.count_ones() as usize;
                by_size[j].add(table[(mask | bit) as usize] - table[mask as usize]);
            }
        }
        let mut phi = NeumaierSum::new();
        for (j, s) in by_size.iter().enumerate() {
            phi.add(weights[j] * s.value());
        }
        phi.value()
    });
    Ok(ExactShapleyResult {
        phi,
        evals: oracle.eval_count() - before,
        elapsed: start.elapsed(),
    })
}

/// Exact values from the ordering form `φ_i = (1/n!) Σ_R ρ_i(P_i^R)`,
/// walking all `n!` orderings with Heap's algorithm.
pub fn shapley_exact_permutations<G: Game>(oracle: &ValueOracle<G>) -> Result<ExactShapleyResult> {
    let n = oracle.n();
    if n > PERMUTATION_CAP {
        return Err(ShapleyError::TooManyPlayers {
            n,
            cap: PERMUTATION_CAP,
        });
    }
    let start = Instant::now();
    let before = oracle.eval_count();
    let table = value_table(oracle);
    let mut sums = vec![NeumaierSum::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut count = 0u64;

    let mut visit = |order: &[usize]| {
        let mut mask = 0usize;
        for &k in order {
            let next = mask | (1 << k);
            sums[k].add(table[next] - table[mask]);
            mask = next;
        }
        count += 1;
    };

    // iterative Heap's algorithm
    visit(&order);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    let phi = sums.iter().map(|s| s.value() / count as f64).collect();
    Ok(ExactShapleyResult {
        phi,
        evals: oracle.eval_count() - before,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{AdditiveGame, MajorityGame, ReserveGame, UnanimityGame};

    fn exact(g: impl Game) -> Vec<f64> {
        shapley_exact_subsets(&ValueOracle::new(g), SUBSET_CAP, Execution::default())
            .unwrap()
            .phi
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn weights_match_exact_rationals() {
        fn fact(k: u64) -> u128 {
            (1..=k as u128).product()
        }
        for n in 1..=12u64 {
            let w = subset_weights(n as usize);
            for j in 0..n {
                let exact = (fact(j) * fact(n - j - 1)) as f64 / fact(n) as f64;
                assert!(
                    (w[j as usize] - exact).abs() <= 1e-14 * exact,
                    "n={n} j={j}"
                );
            }
        }
    }

    #[test]
    fn additive_game() {
        assert_close(
            &exact(AdditiveGame::new(vec![1.0, 2.0, 3.0])),
            &[1.0, 2.0, 3.0],
            1e-12,
        );
    }

    #[test]
    fn symmetric_reserve_game() {
        let g = ReserveGame::unit_rate(vec![1.0; 3], 1.5).unwrap();
        assert_close(&exact(g), &[-0.5; 3], 1e-12);
    }

    #[test]
    fn majority_game_by_both_forms() {
        let third = [1.0 / 3.0; 3];
        assert_close(&exact(MajorityGame::new(3, 2)), &third, 1e-12);
        let perm = shapley_exact_permutations(&ValueOracle::new(MajorityGame::new(3, 2))).unwrap();
        assert_close(&perm.phi, &third, 1e-12);
    }

    #[test]
    fn single_player_and_glove() {
        let g = AdditiveGame::new(vec![4.25]);
        let perm = shapley_exact_permutations(&ValueOracle::new(g)).unwrap();
        assert_eq!(perm.phi, vec![4.25]);
        let glove =
            shapley_exact_permutations(&ValueOracle::new(UnanimityGame::new(2, &[0, 1]))).unwrap();
        assert_eq!(glove.phi, vec![0.5, 0.5]);
    }

    #[test]
    fn forms_agree_on_reserve_game() {
        let g = ReserveGame::unit_rate(vec![0.5, 1.0, 1.5], 1.0).unwrap();
        let oracle = ValueOracle::new(g);
        let a = shapley_exact_subsets(&oracle, SUBSET_CAP, Execution::Sequential).unwrap();
        let b = shapley_exact_permutations(&oracle).unwrap();
        assert_close(&a.phi, &b.phi, 1e-12);
        assert_eq!(a.evals, 8);
    }

    #[test]
    fn size_caps() {
        let big = ValueOracle::new(AdditiveGame::new(vec![1.0; 25]));
        assert_eq!(
            shapley_exact_subsets(&big, SUBSET_CAP, Execution::default()).unwrap_err(),
            ShapleyError::TooManyPlayers { n: 25, cap: 24 }
        );
        let eleven = ValueOracle::new(AdditiveGame::new(vec![1.0; 11]));
        assert!(shapley_exact_permutations(&eleven).is_err());
    }
}
