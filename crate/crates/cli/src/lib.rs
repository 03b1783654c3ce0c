//! Command implementations for the `dr-shapley` binary.
//!
//! Every command reads the same flag set, optionally merged with a JSON
//! config file (flags win), and writes CSV and JSON files into `--out`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use dr_shapley::exact::SUBSET_CAP;
use dr_shapley::experiment::{
    benefit, mspe_table, regret_curve, sigma_table, strata_profiles, variance_curve, ProfileSource,
};
use dr_shapley::games::{
    gen_load_population, gen_reserve_population, reserve_benchmark, AdditiveGame, LoadFollowGame,
    LoadPopulationConfig, ReserveGame, HORIZON,
};
use dr_shapley::io;
use dr_shapley::variance::StrataProfile;
use dr_shapley::{
    estimate_game, shapley_exact_subsets, Coalition, Execution, Game, PolicySpec, RngSeed,
    ShapleyError, ValueOracle,
};

pub const DEFAULT_N: usize = 20;
pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_REPS: usize = 100;
pub const DEFAULT_GRID: [usize; 4] = [500, 1000, 2000, 5000];
pub const DEFAULT_PILOT: usize = 200;
pub const DEFAULT_PILOT_SAMPLES: usize = 1_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "dr-shapley",
    version,
    about = "Shapley-value payments for demand-response games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact Shapley values by subset enumeration (at most 24 players).
    Exact(CommonArgs),
    /// Stratified estimates for every player, balanced to v(X).
    Estimate(CommonArgs),
    /// Empirical and analytic variance of the estimator against the budget.
    VarianceCurve(CommonArgs),
    /// Excess variance of each policy over ideal allocation.
    RegretCurve(CommonArgs),
    /// Normalized mean squared prediction error per policy.
    MspeTable(CommonArgs),
    /// Pilot estimate of how much adaptive allocation can gain.
    Benefit(CommonArgs),
    /// Write a synthetic load population and its target as CSV.
    GenLoads(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Estimate(_) => "estimate",
            Command::VarianceCurve(_) => "variance-curve",
            Command::RegretCurve(_) => "regret-curve",
            Command::MspeTable(_) => "mspe-table",
            Command::Benefit(_) => "benefit",
            Command::GenLoads(_) => "gen-loads",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Exact(a)
            | Command::Estimate(a)
            | Command::VarianceCurve(a)
            | Command::RegretCurve(a)
            | Command::MspeTable(a)
            | Command::Benefit(a)
            | Command::GenLoads(a) => a,
        }
    }
}

/// Flags shared by all commands. The config file uses the same names.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CommonArgs {
    /// reserve | loadfollow | csv:<path> | additive:<path>
    #[arg(long)]
    pub game: Option<String>,
    /// Number of players for generated games.
    #[arg(long)]
    pub n: Option<usize>,
    /// Samples per player (N).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Repetitions (R).
    #[arg(long)]
    pub reps: Option<usize>,
    /// random | equal | neyman | sigmoid | sigmoid:<gamma>:<beta>; repeatable.
    #[arg(long)]
    pub policy: Vec<String>,
    /// Seed for the sampling streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed for generated populations.
    #[arg(long)]
    pub game_seed: Option<u64>,
    /// Sigmoid schedule midpoint, as a fraction of N.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sigmoid schedule width, as a fraction of N.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reserve leeway; generated reserve games default to 0.75 (n/2 + 1).
    #[arg(long)]
    pub delta_m: Option<f64>,
    /// Target profile CSV for csv load games (default: undelayed aggregate).
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Sample-size grid for the curve commands, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
    /// Pilot samples per stratum for `benefit`.
    #[arg(long)]
    pub pilot: Option<usize>,
    /// Pilot samples per player for stratum spreads when the game is too
    /// large to enumerate.
    #[arg(long)]
    pub pilot_samples: Option<usize>,
    /// Add exact values and absolute errors to `estimates.csv`.
    #[arg(long)]
    pub with_exact: bool,
    /// Record elapsed time in `exact_shapley.json`.
    #[arg(long)]
    pub timing: bool,
    /// JSON config file with any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn merge(self, file: CommonArgs) -> CommonArgs {
        CommonArgs {
            game: self.game.or(file.game),
            n: self.n.or(file.n),
            samples: self.samples.or(file.samples),
            reps: self.reps.or(file.reps),
            policy: if self.policy.is_empty() {
                file.policy
            } else {
                self.policy
            },
            seed: self.seed.or(file.seed),
            game_seed: self.game_seed.or(file.game_seed),
            gamma: self.gamma.or(file.gamma),
            beta: self.beta.or(file.beta),
            out: self.out.or(file.out),
            threads: self.threads.or(file.threads),
            delta_m: self.delta_m.or(file.delta_m),
            target: self.target.or(file.target),
            grid: if self.grid.is_empty() {
                file.grid
            } else {
                self.grid
            },
            pilot: self.pilot.or(file.pilot),
            pilot_samples: self.pilot_samples.or(file.pilot_samples),
            with_exact: self.with_exact || file.with_exact,
            timing: self.timing || file.timing,
            config: self.config,
        }
    }
}

/// Invalid flags or config; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// 2 for configuration and input errors, 3 when a game is too large for
/// exact computation, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(se) = cause.downcast_ref::<ShapleyError>() {
            return match se {
                ShapleyError::TooManyPlayers { .. } => 3,
                ShapleyError::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameSpec {
    Reserve,
    LoadFollow,
    Csv(PathBuf),
    Additive(PathBuf),
}

impl std::str::FromStr for GameSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        match s {
            "reserve" => Ok(GameSpec::Reserve),
            "loadfollow" => Ok(GameSpec::LoadFollow),
            _ => {
                if let Some(p) = s.strip_prefix("csv:") {
                    Ok(GameSpec::Csv(p.into()))
                } else if let Some(p) = s.strip_prefix("additive:") {
                    Ok(GameSpec::Additive(p.into()))
                } else {
                    Err(ConfigError(format!(
                        "unknown game {s:?} (expected reserve | loadfollow | csv:<path> | additive:<path>)"
                    )))
                }
            }
        }
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub n: Option<usize>,
    pub samples: usize,
    pub reps: usize,
    pub policies: Vec<PolicySpec>,
    pub seed: RngSeed,
    pub game_seed: RngSeed,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub delta_m: Option<f64>,
    pub target: Option<PathBuf>,
    pub grid: Vec<usize>,
    pub pilot: usize,
    pub pilot_samples: usize,
    pub with_exact: bool,
    pub timing: bool,
}

fn default_policies(command: &str) -> Vec<PolicySpec> {
    match command {
        "variance-curve" | "regret-curve" => vec![
            PolicySpec::Random,
            PolicySpec::Equal,
            PolicySpec::Neyman,
            PolicySpec::sigmoid(),
        ],
        "mspe-table" => vec![
            PolicySpec::Random,
            PolicySpec::Equal,
            PolicySpec::sigmoid(),
            PolicySpec::Neyman,
        ],
        _ => vec![PolicySpec::sigmoid()],
    }
}

impl ExperimentConfig {
    pub fn resolve(command: &str, args: CommonArgs) -> Result<Self> {
        let args = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let file: CommonArgs = serde_json::from_str(&text)
                    .map_err(|e| config_error(format!("config {}: {e}", path.display())))?;
                args.merge(file)
            }
            None => args,
        };
        let game = args
            .game
            .as_deref()
            .unwrap_or("reserve")
            .parse::<GameSpec>()?;
        if args.gamma.is_some() || args.beta.is_some() {
            let g = args.gamma.unwrap_or(dr_shapley::policy::DEFAULT_GAMMA);
            let b = args.beta.unwrap_or(dr_shapley::policy::DEFAULT_BETA);
            dr_shapley::EpsilonSchedule::new(g, b, 1).map_err(|e| config_error(e.to_string()))?;
        }
        let mut policies = Vec::new();
        for raw in &args.policy {
            let mut spec: PolicySpec = raw
                .parse()
                .map_err(|e: ShapleyError| config_error(e.to_string()))?;
            if raw == "sigmoid" {
                spec = PolicySpec::Sigmoid {
                    gamma: args.gamma.unwrap_or(dr_shapley::policy::DEFAULT_GAMMA),
                    beta: args.beta.unwrap_or(dr_shapley::policy::DEFAULT_BETA),
                };
            }
            if !policies.contains(&spec) {
                policies.push(spec);
            }
        }
        if policies.is_empty() {
            policies = default_policies(command)
                .into_iter()
                .map(|p| match p {
                    PolicySpec::Sigmoid { gamma, beta } => PolicySpec::Sigmoid {
                        gamma: args.gamma.unwrap_or(gamma),
                        beta: args.beta.unwrap_or(beta),
                    },
                    other => other,
                })
                .collect();
        }
        let cfg = ExperimentConfig {
            game,
            n: args.n,
            samples: args.samples.unwrap_or(DEFAULT_SAMPLES),
            reps: args.reps.unwrap_or(DEFAULT_REPS),
            policies,
            seed: RngSeed(args.seed.unwrap_or(0)),
            game_seed: RngSeed(args.game_seed.unwrap_or(0)),
            out: args.out.unwrap_or_else(|| PathBuf::from(".")),
            threads: args.threads,
            delta_m: args.delta_m,
            target: args.target,
            grid: if args.grid.is_empty() {
                DEFAULT_GRID.to_vec()
            } else {
                args.grid
            },
            pilot: args.pilot.unwrap_or(DEFAULT_PILOT),
            pilot_samples: args.pilot_samples.unwrap_or(DEFAULT_PILOT_SAMPLES),
            with_exact: args.with_exact,
            timing: args.timing,
        };
        if cfg.n == Some(0) {
            return Err(config_error("--n must be >= 1"));
        }
        if cfg.reps == 0 {
            return Err(config_error("--reps must be >= 1"));
        }
        if cfg.threads == Some(0) {
            return Err(config_error("--threads must be >= 1"));
        }
        if cfg.pilot < 2 {
            return Err(config_error("--pilot must be >= 2 samples per stratum"));
        }
        Ok(cfg)
    }

    fn check_budget(&self, n: usize) -> Result<()> {
        if self.samples < n {
            return Err(config_error(format!(
                "--samples {} is below the player count {n}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Any of the games the harness can run.
#[derive(Debug, Clone)]
pub enum AnyGame {
    Reserve(ReserveGame),
    LoadFollow(LoadFollowGame),
    Additive(AdditiveGame),
}

impl Game for AnyGame {
    fn n_players(&self) -> usize {
        match self {
            AnyGame::Reserve(g) => g.n_players(),
            AnyGame::LoadFollow(g) => g.n_players(),
            AnyGame::Additive(g) => g.n_players(),
        }
    }

    fn value(&self, s: &Coalition) -> f64 {
        match self {
            AnyGame::Reserve(g) => g.value(s),
            AnyGame::LoadFollow(g) => g.value(s),
            AnyGame::Additive(g) => g.value(s),
        }
    }

    fn marginal(&self, i: usize, s: &Coalition) -> f64 {
        match self {
            AnyGame::Reserve(g) => g.marginal(i, s),
            AnyGame::LoadFollow(g) => g.marginal(i, s),
            AnyGame::Additive(g) => g.marginal(i, s),
        }
    }
}

fn check_n(requested: Option<usize>, actual: usize, path: &Path) -> Result<()> {
    match requested {
        Some(n) if n != actual => Err(config_error(format!(
            "--n {n} disagrees with {} players in {}",
            actual,
            path.display()
        ))),
        _ => Ok(()),
    }
}

pub fn build_game(cfg: &ExperimentConfig) -> Result<AnyGame> {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let game = match &cfg.game {
        GameSpec::Reserve => AnyGame::Reserve(match cfg.delta_m {
            Some(dm) => gen_reserve_population(n, 0.7, 0.8, dm, cfg.game_seed)?,
            None => reserve_benchmark(n, cfg.game_seed)?,
        }),
        GameSpec::LoadFollow => AnyGame::LoadFollow(gen_load_population(
            LoadPopulationConfig::new(n),
            cfg.game_seed,
        )?),
        GameSpec::Additive(path) => {
            let rows = io::read_scalar_csv(path)?;
            check_n(cfg.n, rows.len(), path)?;
            AnyGame::Additive(AdditiveGame::new(rows.into_iter().map(|r| r.1).collect()))
        }
        GameSpec::Csv(path) => match io::sniff_field_count(path)? {
            Some(2) => {
                let rows = io::read_scalar_csv(path)?;
                check_n(cfg.n, rows.len(), path)?;
                let dm = cfg
                    .delta_m
                    .ok_or_else(|| config_error("reserve population files need --delta-m"))?;
                AnyGame::Reserve(ReserveGame::unit_rate(
                    rows.into_iter().map(|r| r.1).collect(),
                    dm,
                )?)
            }
            Some(k) if k == HORIZON + 2 => {
                let profiles = io::read_load_csv(path)?;
                check_n(cfg.n, profiles.len(), path)?;
                let target = match &cfg.target {
                    Some(t) => io::read_target_csv(t)?,
                    None => {
                        let mut agg = vec![0.0; HORIZON];
                        for p in &profiles {
                            agg.iter_mut().zip(&p.demand).for_each(|(a, d)| *a += d);
                        }
                        agg
                    }
                };
                AnyGame::LoadFollow(LoadFollowGame::new(profiles, target)?)
            }
            Some(k) => {
                return Err(config_error(format!(
                "{}: rows have {k} fields; expected 2 (id,delta_x) or {} (id,h0..h23,max_delay)",
                path.display(),
                HORIZON + 2
            )))
            }
            None => return Err(config_error(format!("{} has no rows", path.display()))),
        },
    };
    if game.n_players() == 0 {
        return Err(config_error("game has no players"));
    }
    Ok(game)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn csv_text(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn exact_values(
    oracle: &ValueOracle<AnyGame>,
    exec: Execution,
) -> Result<dr_shapley::ExactShapleyResult> {
    shapley_exact_subsets(oracle, SUBSET_CAP, exec).map_err(|e| {
        let hint = matches!(e, ShapleyError::TooManyPlayers { .. });
        let err = anyhow::Error::new(e);
        if hint {
            err.context(format!(
                "exact Shapley values are limited to {SUBSET_CAP} players; use `estimate` instead"
            ))
        } else {
            err
        }
    })
}

fn profiles(
    cfg: &ExperimentConfig,
    oracle: &ValueOracle<AnyGame>,
    exec: Execution,
) -> Result<Vec<StrataProfile>> {
    let per_stratum = (cfg.pilot_samples / oracle.n()).max(2);
    Ok(strata_profiles(
        oracle,
        ProfileSource::Auto { per_stratum },
        cfg.seed.derive(1),
        exec,
    )?)
}

#[derive(Serialize)]
struct ExactOutput<'a> {
    n: usize,
    phi: &'a [f64],
    evals: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

fn cmd_exact(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    let start = Instant::now();
    let res = exact_values(&oracle, exec)?;
    let elapsed = start.elapsed().as_secs_f64();
    write_json(
        &cfg.out,
        "exact_shapley.json",
        &ExactOutput {
            n: oracle.n(),
            phi: &res.phi,
            evals: res.evals,
            elapsed_seconds: cfg.timing.then_some(elapsed),
        },
    )?;
    let rows = res
        .phi
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{},{p}", i + 1));
    write_file(&cfg.out, "exact_shapley.csv", &csv_text("player,phi", rows))?;
    Ok(())
}

fn cmd_estimate(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    let n = oracle.n();
    cfg.check_budget(n)?;
    let [spec] = cfg.policies[..] else {
        return Err(config_error("estimate takes exactly one --policy"));
    };
    let sigma = if spec.needs_sigma() {
        Some(sigma_table(&profiles(cfg, &oracle, exec)?))
    } else {
        None
    };
    let report = estimate_game(
        &oracle,
        spec,
        cfg.samples,
        cfg.seed,
        0,
        sigma.as_deref(),
        exec,
    )?;
    let exact = if cfg.with_exact {
        Some(exact_values(&oracle, exec)?.phi)
    } else {
        None
    };
    write_json(&cfg.out, "estimate.json", &report)?;
    let header = if exact.is_some() {
        "player,T,var_T,phi_hat,exact,abs_error"
    } else {
        "player,T,var_T,phi_hat"
    };
    let rows = (0..n).map(|i| {
        let mut row = format!(
            "{},{},{},{}",
            i + 1,
            report.t[i],
            report.var_t[i],
            report.phi_hat[i]
        );
        if let Some(ex) = &exact {
            row.push_str(&format!(",{},{}", ex[i], (report.phi_hat[i] - ex[i]).abs()));
        }
        row
    });
    write_file(&cfg.out, "estimates.csv", &csv_text(header, rows))?;
    let rows = report.strata.iter().enumerate().flat_map(|(i, strata)| {
        strata.iter().enumerate().map(move |(j, s)| {
            format!(
                "{},{j},{},{},{}",
                i + 1,
                s.count,
                s.mean_or_zero(),
                s.sigma()
            )
        })
    });
    write_file(
        &cfg.out,
        "strata.csv",
        &csv_text("player,stratum,count,mean,sigma", rows),
    )?;
    let total = dr_shapley::numeric::accurate_sum(&report.phi_hat);
    println!("sum phi_hat = {total}, v(X) = {}", report.budget);
    Ok(())
}

fn cmd_variance_curve(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    let prof = profiles(cfg, &oracle, exec)?;
    let points = variance_curve(
        &oracle,
        &cfg.policies,
        &cfg.grid,
        cfg.reps,
        cfg.seed,
        &prof,
        exec,
    )?;
    let rows = points.iter().map(|p| {
        format!(
            "{},{},{},{}",
            p.policy, p.samples, p.empirical_var, p.analytic_var
        )
    });
    write_file(
        &cfg.out,
        "variance_curve.csv",
        &csv_text("policy,N,empirical_var,analytic_var", rows),
    )?;
    Ok(())
}

fn cmd_regret_curve(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    let prof = profiles(cfg, &oracle, exec)?;
    let points = regret_curve(
        &oracle,
        &cfg.policies,
        &cfg.grid,
        cfg.reps,
        cfg.seed,
        &prof,
        exec,
    )?;
    let rows = points.iter().map(|p| {
        format!(
            "{},{},{},{},{}",
            p.policy, p.samples, p.variance, p.ideal_variance, p.regret
        )
    });
    write_file(
        &cfg.out,
        "regret_curve.csv",
        &csv_text("schedule,N,variance,ideal_variance,regret", rows),
    )?;
    Ok(())
}

fn cmd_mspe_table(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    cfg.check_budget(oracle.n())?;
    let truth = exact_values(&oracle, exec)?.phi;
    let prof = profiles(cfg, &oracle, exec)?;
    let report = mspe_table(
        &oracle,
        &cfg.policies,
        cfg.samples,
        cfg.reps,
        cfg.seed,
        &truth,
        &prof,
        exec,
    )?;
    let rows = report
        .rows
        .iter()
        .map(|r| format!("{},{},{}", r.policy, r.mspe, r.normalized));
    write_file(
        &cfg.out,
        "mspe_table.csv",
        &csv_text("policy,mspe,normalized_mspe", rows),
    )?;
    write_json(&cfg.out, "mspe_table.json", &report)?;
    for r in &report.rows {
        println!("{:<12} {:>10.4}", r.policy, r.normalized);
    }
    Ok(())
}

fn cmd_benefit(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let oracle = ValueOracle::new(build_game(cfg)?);
    let report = benefit(&oracle, cfg.pilot, cfg.seed.derive(2), exec)?;
    write_json(&cfg.out, "benefit.json", &report)?;
    println!("benefit ratio: {}", report.ratio);
    println!("{}", report.recommendation);
    Ok(())
}

fn cmd_gen_loads(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.game != GameSpec::LoadFollow && cfg.game != GameSpec::Reserve {
        return Err(config_error(
            "gen-loads generates a synthetic population; drop --game",
        ));
    }
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let game = gen_load_population(LoadPopulationConfig::new(n), cfg.game_seed)?;
    let mut buf = Vec::new();
    io::write_load_csv(&mut buf, game.profiles())?;
    write_file(&cfg.out, "loads.csv", &String::from_utf8(buf)?)?;
    let header: Vec<String> = (0..game.horizon()).map(|h| format!("h{h}")).collect();
    let values: Vec<String> = game.target().iter().map(|v| v.to_string()).collect();
    write_file(
        &cfg.out,
        "target.csv",
        &csv_text(&header.join(","), [values.join(",")]),
    )?;
    Ok(())
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> Result<()> {
    let exec = Execution::default();
    match command {
        Command::Exact(_) => cmd_exact(cfg, exec),
        Command::Estimate(_) => cmd_estimate(cfg, exec),
        Command::VarianceCurve(_) => cmd_variance_curve(cfg, exec),
        Command::RegretCurve(_) => cmd_regret_curve(cfg, exec),
        Command::MspeTable(_) => cmd_mspe_table(cfg, exec),
        Command::Benefit(_) => cmd_benefit(cfg, exec),
        Command::GenLoads(_) => cmd_gen_loads(cfg),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = ExperimentConfig::resolve(cli.command.name(), cli.command.args().clone())?;
    #[cfg(feature = "parallel")]
    if let Some(threads) = cfg.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        return pool.install(|| dispatch(&cli.command, &cfg));
    }
    dispatch(&cli.command, &cfg)
}
