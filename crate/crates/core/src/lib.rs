//! Shapley-value payment allocation for demand-response programs.
//!
//! The crate computes exact Shapley values for small games and estimates
//! them for large ones by stratified sampling over coalition sizes. The
//! sample budget of each player is split between strata by an allocation
//! policy; the adaptive `sigmoid` policy learns the stratum spreads while
//! sampling and steers the budget towards the noisiest strata. Raw
//! estimates are then corrected by maximum likelihood so that the payments
//! add up exactly to the value of the grand coalition.
//!
//! Two demand-response games are included: a reserve-shortfall penalty
//! ([`games::ReserveGame`]) and greedy deferrable-load following
//! ([`games::LoadFollowGame`]).

pub mod coalition;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod experiment;
pub mod game;
pub mod games;
pub mod io;
pub mod numeric;
pub mod parallel;
pub mod policy;
pub mod sampling;
pub mod stats;
pub mod variance;

pub use coalition::{Coalition, PlayerId};
pub use error::{Result, ShapleyError};
pub use estimator::{
    estimate_game, mle_budget_balance, stratified_estimate, uniform_permutation_estimate,
    EstimatorReport, PlayerEstimate,
};
pub use exact::{shapley_exact_permutations, shapley_exact_subsets, ExactShapleyResult};
pub use game::{Game, ValueOracle};
pub use parallel::Execution;
pub use policy::{AllocationPolicy, EpsilonSchedule, PolicySpec};
pub use sampling::{sample_coalition_of_size, RngSeed};
pub use stats::{welford_update, StratumStats};
pub use variance::StrataProfile;
