use std::time::Instant;

use dr_shapley::exact::{shapley_exact_subsets, SUBSET_CAP};
use dr_shapley::games::{
    gen_load_population, gen_reserve_population, LoadFollowGame, LoadPopulationConfig, LoadProfile,
    ReserveGame, HORIZON,
};
use dr_shapley::io::{parse_load_csv, write_load_csv};
use dr_shapley::{Coalition, Execution, Game, RngSeed, ValueOracle};
use proptest::prelude::*;
use rand::Rng;

fn random_coalition(n: usize, rng: &mut impl Rng) -> Coalition {
    let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    Coalition::from_members(n, members)
}

#[test]
fn loadfollow_value_is_bounded() {
    let game = gen_load_population(LoadPopulationConfig::new(50), RngSeed(4)).unwrap();
    let max = game.max_value();
    assert_eq!(game.value(&Coalition::empty(50)), 0.0);
    let mut rng = RngSeed(5).rng();
    for _ in 0..2000 {
        let s = random_coalition(50, &mut rng);
        assert!(game.value(&s) <= max);
    }
}

#[test]
fn lone_undelayable_load_matches_target() {
    let cfg = LoadPopulationConfig {
        n: 1,
        horizon: HORIZON,
        max_delay_cap: 0,
    };
    let game = gen_load_population(cfg, RngSeed(6)).unwrap();
    assert_eq!(game.target(), &game.profiles()[0].demand[..]);
    assert_eq!(game.value(&Coalition::full(1)), game.max_value());
}

#[test]
fn generation_is_fast_and_deterministic() {
    let start = Instant::now();
    let a = gen_load_population(LoadPopulationConfig::new(500), RngSeed(1)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let b = gen_load_population(LoadPopulationConfig::new(500), RngSeed(1)).unwrap();
    assert_eq!(a.profiles(), b.profiles());
    assert_eq!(a.target(), b.target());
    assert!(a.profiles().iter().all(|p| p.max_delay <= 6));
}

#[test]
fn load_csv_round_trip() {
    let game = gen_load_population(LoadPopulationConfig::new(30), RngSeed(2)).unwrap();
    let mut buf = Vec::new();
    write_load_csv(&mut buf, game.profiles()).unwrap();
    let back = parse_load_csv(&buf[..]).unwrap();
    assert_eq!(back, game.profiles());
}

#[test]
fn reserve_population_range() {
    let g = gen_reserve_population(20, 0.7, 0.8, 1.0, RngSeed(3)).unwrap();
    assert!(g.delta_x().iter().all(|x| (0.7..=0.8).contains(x)));
    let flat = gen_reserve_population(20, 0.75, 0.75, 1.0, RngSeed(3)).unwrap();
    assert!(flat.delta_x().iter().all(|x| *x == 0.75));
    assert!(gen_reserve_population(5, 0.8, 0.7, 1.0, RngSeed(3)).is_err());
}

#[test]
fn reserve_null_and_symmetric_players() {
    let game = ReserveGame::unit_rate(vec![0.0, 0.7, 0.9, 0.7, 0.4, 0.0], 1.0).unwrap();
    let phi = shapley_exact_subsets(&ValueOracle::new(game), SUBSET_CAP, Execution::default())
        .unwrap()
        .phi;
    assert!(phi[0].abs() < 1e-12 && phi[5].abs() < 1e-12);
    assert!((phi[1] - phi[3]).abs() < 1e-9);
}

#[test]
fn loadfollow_grand_coalition_revenue_is_positive() {
    let game = gen_load_population(LoadPopulationConfig::new(40), RngSeed(8)).unwrap();
    let v = game.value(&Coalition::full(40));
    assert!(v > 0.0 && v <= game.max_value());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_never_exceeds_bound(
        loads in prop::collection::vec((prop::collection::vec(0.0f64..3.0, HORIZON), 0usize..8), 1..12),
        target in prop::collection::vec(0.0f64..6.0, HORIZON),
        mask in any::<u64>(),
    ) {
        let n = loads.len();
        let profiles: Vec<LoadProfile> = loads
            .into_iter()
            .enumerate()
            .map(|(id, (d, m))| LoadProfile::new(id as u64, d, m).unwrap())
            .collect();
        let game = LoadFollowGame::new(profiles, target).unwrap();
        let s = Coalition::from_mask(n, mask & ((1u64 << n) - 1));
        let v = game.value(&s);
        prop_assert!(v <= game.max_value());
        prop_assert_eq!(v.to_bits(), game.value(&s).to_bits());
        if let Some(i) = (0..n).find(|&i| !s.contains(i)) {
            let m = game.marginal(i, &s);
            prop_assert_eq!(m.to_bits(), (game.value(&s.with(i)) - v).to_bits());
        }
    }
}
