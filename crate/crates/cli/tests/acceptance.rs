//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dr_shapley::exact::{shapley_exact_permutations, shapley_exact_subsets, SUBSET_CAP};
use dr_shapley::experiment::{
    benefit, empirical_variances, mspe_table, regret_curve, run_repetitions, strata_profiles,
    ProfileSource,
};
use dr_shapley::games::{
    gen_load_population, reserve_benchmark, AdditiveGame, ConstantGame, LoadFollowGame,
    LoadPopulationConfig, LoadProfile, ReserveGame,
};
use dr_shapley::numeric::{accurate_sum, mean};
use dr_shapley::variance::{analytic_var_es, analytic_var_rs, analytic_var_sd, StrataProfile};
use dr_shapley::{
    estimate_game, Coalition, EpsilonSchedule, Execution, Game, PolicySpec, RngSeed, ValueOracle,
};
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exec() -> Execution {
    Execution::default()
}

fn exact(game: impl Game) -> Vec<f64> {
    shapley_exact_subsets(&ValueOracle::new(game), SUBSET_CAP, exec())
        .expect("exact values")
        .phi
}

fn oracle_agreement() -> Result<String, String> {
    let mut rng = RngSeed(101).rng();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
        let game = ReserveGame::unit_rate(dx, rng.gen_range(0.0..3.0)).unwrap();
        let oracle = ValueOracle::new(game);
        let a = shapley_exact_subsets(&oracle, SUBSET_CAP, exec())
            .unwrap()
            .phi;
        let b = shapley_exact_permutations(&oracle).unwrap().phi;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst < 1e-12, || {
        format!("max |subset - permutation| = {worst:e}")
    })?;
    Ok(format!("50 games, max |subset - permutation| = {worst:e}"))
}

fn axioms() -> Result<String, String> {
    let mut rng = RngSeed(202).rng();
    let (mut eff, mut sym, mut null) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.gen_range(3..=12);
        let mut dx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.2)).collect();
        dx[0] = 0.0;
        dx[2] = dx[1];
        let game = ReserveGame::unit_rate(dx, rng.gen_range(0.0..3.0)).unwrap();
        let grand = game.value(&Coalition::full(n));
        let phi = exact(game);
        eff = eff.max((accurate_sum(&phi) - grand).abs());
        sym = sym.max((phi[1] - phi[2]).abs());
        null = null.max(phi[0].abs());
    }
    ensure(eff < 1e-9, || format!("efficiency gap {eff:e}"))?;
    ensure(sym < 1e-9, || format!("symmetry gap {sym:e}"))?;
    ensure(null < 1e-12, || format!("null player value {null:e}"))?;
    Ok(format!(
        "efficiency {eff:e}, symmetry {sym:e}, null {null:e}"
    ))
}

fn read_estimates_sum(dir: &Path) -> f64 {
    let text = std::fs::read_to_string(dir.join("estimates.csv")).unwrap();
    let phi: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    accurate_sum(&phi)
}

fn report_budget(dir: &Path) -> f64 {
    let text = std::fs::read_to_string(dir.join("estimate.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["budget"].as_f64().unwrap()
}

fn budget_balance() -> Result<String, String> {
    let policies = [PolicySpec::Random, PolicySpec::Equal, PolicySpec::sigmoid()];
    let mut worst = 0.0f64;
    let mut runs = 0;
    let mut check = |oracle: &ValueOracle<Box<dyn Game>>, budget: usize, seed: u64| {
        for spec in policies {
            let r = estimate_game(oracle, spec, budget, RngSeed(seed), 0, None, exec()).unwrap();
            worst = worst.max((accurate_sum(&r.phi_hat) - r.budget).abs());
            runs += 1;
        }
    };
    for seed in 0..20u64 {
        let n = 3 + (seed as usize % 18);
        let g: Box<dyn Game> = Box::new(reserve_benchmark(n, RngSeed(seed)).unwrap());
        check(&ValueOracle::new(g), 40 * n, seed);
        let g: Box<dyn Game> =
            Box::new(gen_load_population(LoadPopulationConfig::new(n), RngSeed(seed)).unwrap());
        check(&ValueOracle::new(g), 20 * n, seed);
    }
    // degenerate: every variance zero
    let g: Box<dyn Game> = Box::new(ConstantGame::new(7, -3.5));
    check(&ValueOracle::new(g), 70, 1);
    let g: Box<dyn Game> = Box::new(AdditiveGame::new(vec![0.25, -1.0, 4.0, 0.0]));
    check(&ValueOracle::new(g), 40, 1);

    let dir = tempfile::tempdir().unwrap();
    for (i, policy) in ["random", "equal", "neyman", "sigmoid"].iter().enumerate() {
        let out = dir.path().join(policy);
        run_cli(
            &[
                "estimate",
                "--n",
                "12",
                "--samples",
                "600",
                "--policy",
                policy,
                "--seed",
                &i.to_string(),
            ],
            &out,
        )?;
        worst = worst.max((read_estimates_sum(&out) - report_budget(&out)).abs());
        runs += 1;
    }
    ensure(worst < 1e-9, || {
        format!("max |sum phi_hat - v(X)| = {worst:e}")
    })?;
    Ok(format!("{runs} runs, max |sum phi_hat - v(X)| = {worst:e}"))
}

fn unbiasedness() -> Result<String, String> {
    let oracle = ValueOracle::new(reserve_benchmark(12, RngSeed(0)).unwrap());
    let truth = exact(reserve_benchmark(12, RngSeed(0)).unwrap());
    let reps = 1000;
    let runs = run_repetitions(
        &oracle,
        PolicySpec::Equal,
        1200,
        RngSeed(404),
        reps,
        None,
        exec(),
    )
    .map_err(|e| e.to_string())?;
    let vars = empirical_variances(&runs);
    let mut worst = 0.0f64;
    for i in 0..12 {
        let m = mean(&runs.iter().map(|r| r.t[i]).collect::<Vec<_>>());
        let se = (vars[i] / reps as f64).sqrt();
        let gap = (m - truth[i]).abs();
        ensure(gap <= 4.0 * se + 1e-12, || {
            format!(
                "player {}: mean {m} vs exact {} (SE {se:e})",
                i + 1,
                truth[i]
            )
        })?;
        if se > 0.0 {
            worst = worst.max(gap / se);
        }
    }
    Ok(format!(
        "max |mean - exact| / SE = {worst:.2} over 12 players"
    ))
}

fn analytic_variance() -> Result<String, String> {
    let oracle = ValueOracle::new(reserve_benchmark(12, RngSeed(0)).unwrap());
    let profiles = strata_profiles(&oracle, ProfileSource::Exhaustive, RngSeed(0), exec()).unwrap();
    let budget = 5000;
    let mut parts = Vec::new();
    for (spec, closed) in [
        (
            PolicySpec::Equal,
            analytic_var_es as fn(&StrataProfile, f64) -> _,
        ),
        (PolicySpec::Random, analytic_var_rs),
    ] {
        let runs = run_repetitions(&oracle, spec, budget, RngSeed(505), 500, None, exec())
            .map_err(|e| e.to_string())?;
        let emp = mean(&empirical_variances(&runs));
        let ana = mean(
            &profiles
                .iter()
                .map(|p| closed(p, budget as f64).unwrap())
                .collect::<Vec<_>>(),
        );
        let rel = (emp - ana).abs() / ana;
        ensure(rel < 0.15, || {
            format!("{}: empirical {emp:e} vs analytic {ana:e}", spec.name())
        })?;
        parts.push(format!("{} rel.err {:.1}%", spec.name(), 100.0 * rel));
    }
    let mut rng = RngSeed(506).rng();
    for _ in 0..1000 {
        let n = rng.gen_range(1..40);
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let sigma: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..4.0)
                }
            })
            .collect();
        let p = StrataProfile::new(mu, sigma).unwrap();
        let b = rng.gen_range(1.0..1e5);
        let (sd, es, rs) = (
            analytic_var_sd(&p, b).unwrap(),
            analytic_var_es(&p, b).unwrap(),
            analytic_var_rs(&p, b).unwrap(),
        );
        ensure(sd <= es && es <= rs, || {
            format!("ordering broken: {sd} {es} {rs}")
        })?;
    }
    parts.push("SD <= ES <= RS on 1000 profiles".into());
    Ok(parts.join(", "))
}

fn allocator_effectiveness() -> Result<String, String> {
    let game = reserve_benchmark(20, RngSeed(0)).unwrap();
    let oracle = ValueOracle::new(game);
    let truth = shapley_exact_subsets(&oracle, SUBSET_CAP, exec())
        .unwrap()
        .phi;
    let profiles = strata_profiles(&oracle, ProfileSource::Exhaustive, RngSeed(0), exec()).unwrap();
    let policies = [
        PolicySpec::Random,
        PolicySpec::Equal,
        PolicySpec::sigmoid(),
        PolicySpec::Neyman,
    ];
    let report = mspe_table(
        &oracle,
        &policies,
        5000,
        200,
        RngSeed(606),
        &truth,
        &profiles,
        exec(),
    )
    .map_err(|e| e.to_string())?;
    let norm = |p: &str| report.row(p).unwrap().normalized;
    let (random, equal, sigmoid) = (norm("random"), norm("equal"), norm("sigmoid"));
    ensure(random > equal && equal > sigmoid && sigmoid >= 1.0, || {
        format!("ordering broken: random {random:.3}, equal {equal:.3}, sigmoid {sigmoid:.3}")
    })?;
    ensure(sigmoid <= 0.6 * equal, || {
        format!("sigmoid {sigmoid:.3} > 0.6 x equal {equal:.3}")
    })?;
    ensure(sigmoid <= 3.0, || {
        format!("sigmoid {sigmoid:.3} > 3 x neyman")
    })?;

    let grid = [500, 1000, 2000, 5000];
    let curve = regret_curve(
        &oracle,
        &[PolicySpec::sigmoid(), PolicySpec::Equal],
        &grid,
        200,
        RngSeed(607),
        &profiles,
        exec(),
    )
    .map_err(|e| e.to_string())?;
    let sig: Vec<f64> = curve
        .iter()
        .filter(|p| p.policy == "sigmoid")
        .map(|p| p.regret)
        .collect();
    let eq_last = curve.iter().rfind(|p| p.policy == "equal").unwrap().regret;
    ensure(sig.windows(2).all(|w| w[1] <= w[0]), || {
        format!("sigmoid regret not non-increasing: {sig:?}")
    })?;
    ensure(sig[3] < eq_last, || {
        format!("sigmoid regret {:e} >= equal {eq_last:e} at N=5000", sig[3])
    })?;
    Ok(format!(
        "normalized MSPE random {random:.2} / equal {equal:.2} / sigmoid {sigmoid:.2} / neyman 1 \
         (reference magnitudes 26.31 / 4.65 / 1.81 / 1); sigmoid regret {}",
        sig.iter()
            .map(|r| format!("{r:.2e}"))
            .collect::<Vec<_>>()
            .join(" > ")
    ))
}

fn epsilon_schedule() -> Result<String, String> {
    let s = EpsilonSchedule::with_defaults(5000);
    let e0 = s.epsilon(0.0);
    ensure((e0 - 1.0).abs() < 1e-15, || format!("eps(0) = {e0}"))?;
    let mut prev = e0;
    for t in 1..=5000 {
        let e = s.epsilon(t as f64);
        ensure(e < prev, || format!("not decreasing at t={t}"))?;
        prev = e;
    }
    let closed = s.kappa() - 1.0 / (1.0 + (-32.0f64 / 3.0).exp());
    let end = s.epsilon(5000.0);
    ensure((end - closed).abs() < 1e-12, || {
        format!("eps(N) = {end} vs {closed}")
    })?;
    Ok(format!(
        "eps(0) = {e0}, eps(N) = {end:.6}, kappa = {:.6}",
        s.kappa()
    ))
}

fn load_following() -> Result<String, String> {
    let game = gen_load_population(LoadPopulationConfig::new(50), RngSeed(808)).unwrap();
    let max = game.max_value();
    let mut rng = RngSeed(809).rng();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let members: Vec<usize> = (0..50).filter(|_| rng.gen_bool(0.5)).collect();
        let v = game.value(&Coalition::from_members(50, members));
        ensure(v <= max, || format!("v = {v} exceeds bound {max}"))?;
        best = best.max(v);
    }

    let mut demand = vec![0.0; 24];
    demand[3..7].copy_from_slice(&[1.0, 2.5, 2.5, 1.0]);
    let load = LoadProfile::new(0, demand, 4).unwrap();
    let target = load.shifted(2);
    let perfect = LoadFollowGame::new(vec![load], target).unwrap();
    let v = perfect.value(&Coalition::full(1));
    ensure(v == perfect.max_value(), || {
        format!("perfect match gives {v}, bound {}", perfect.max_value())
    })?;

    let lf =
        benefit(&ValueOracle::new(game), 200, RngSeed(810), exec()).map_err(|e| e.to_string())?;
    let rs = benefit(
        &ValueOracle::new(reserve_benchmark(20, RngSeed(0)).unwrap()),
        200,
        RngSeed(811),
        exec(),
    )
    .map_err(|e| e.to_string())?;
    ensure(lf.ratio < 1.2, || {
        format!("load-follow benefit ratio {:.3} >= 1.2", lf.ratio)
    })?;
    ensure(rs.ratio > 1.2, || {
        format!("reserve benefit ratio {:.3} <= 1.2", rs.ratio)
    })?;
    Ok(format!(
        "max sampled v / bound = {:.3}, perfect match exact, benefit ratio load-follow {:.3} vs reserve {:.3}",
        best / max,
        lf.ratio,
        rs.ratio
    ))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_dr-shapley"))
        .args(args)
        .arg("--out")
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || {
        format!("`{}` exited with {status}", args.join(" "))
    })
}

fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (PathBuf::from(p.file_name().unwrap()), bytes)
        })
        .collect()
}

fn determinism() -> Result<String, String> {
    let commands: [&[&str]; 7] = [
        &["exact", "--n", "10"],
        &[
            "estimate",
            "--n",
            "16",
            "--samples",
            "800",
            "--policy",
            "neyman",
            "--seed",
            "9",
        ],
        &[
            "variance-curve",
            "--n",
            "8",
            "--reps",
            "20",
            "--grid",
            "80,160",
        ],
        &[
            "regret-curve",
            "--n",
            "8",
            "--reps",
            "20",
            "--grid",
            "80,160",
        ],
        &["mspe-table", "--n", "8", "--samples", "200", "--reps", "10"],
        &[
            "benefit",
            "--game",
            "loadfollow",
            "--n",
            "20",
            "--pilot",
            "20",
        ],
        &["gen-loads", "--n", "15", "--game-seed", "4"],
    ];
    let root = tempfile::tempdir().unwrap();
    let mut files = 0;
    for (k, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "2"), ("c", "2")] {
            let out = root.path().join(format!("{k}{tag}"));
            let mut args = cmd.to_vec();
            args.extend(["--threads", threads]);
            run_cli(&args, &out)?;
            outputs.push(dir_contents(&out));
        }
        ensure(outputs[0] == outputs[1] && outputs[1] == outputs[2], || {
            format!("`{}` output differs between runs", cmd.join(" "))
        })?;
        files += outputs[0].len();
    }
    Ok(format!(
        "7 commands x 3 runs (1 and 2 threads), {files} files byte-identical"
    ))
}

fn scale_smoke() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_cli(
        &[
            "estimate",
            "--game",
            "loadfollow",
            "--n",
            "500",
            "--samples",
            "2000",
            "--policy",
            "equal",
        ],
        dir.path(),
    )?;
    let wall = start.elapsed();
    let text = std::fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    let rows = text.lines().count() - 1;
    ensure(rows == 500, || format!("{rows} rows in estimates.csv"))?;
    let gap = (read_estimates_sum(dir.path()) - report_budget(dir.path())).abs();
    ensure(
        gap < 1e-9 * report_budget(dir.path()).abs().max(1.0),
        || format!("balance gap {gap:e}"),
    )?;
    ensure(wall < Duration::from_secs(30 * 60), || {
        format!("took {wall:?}")
    })?;
    Ok(format!(
        "500 players x 2000 samples in {:.1}s, balance gap {gap:e}",
        wall.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, Check, u64); 10] = [
        ("oracle agreement", oracle_agreement, 10),
        ("axioms at desk scale", axioms, 30),
        ("budget balance", budget_balance, 0),
        ("unbiasedness", unbiasedness, 300),
        ("analytic variance", analytic_variance, 600),
        (
            "adaptive allocator effectiveness",
            allocator_effectiveness,
            900,
        ),
        ("epsilon schedule", epsilon_schedule, 0),
        ("load-following game", load_following, 120),
        ("determinism", determinism, 0),
        ("scale smoke test", scale_smoke, 1800),
    ];
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(detail) if *limit > 0 && secs > *limit as f64 => {
                Err(format!("{detail}; exceeded {limit}s budget"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
