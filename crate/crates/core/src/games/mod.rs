//! Concrete games: the two demand-response programs plus small textbook
//! games used for validation.

mod loadfollow;
mod reserve;
mod simple;

pub use loadfollow::{
    gen_load_population, LoadFollowGame, LoadPopulationConfig, LoadProfile, Schedule, HORIZON,
};
pub use reserve::{gen_reserve_population, reserve_benchmark, ReserveGame};
pub use simple::{AdditiveGame, ConstantGame, MajorityGame, UnanimityGame};
