//! Seeded chain and double-spend simulations.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; run or
//! trial `i` uses stream `i`, so results do not depend on thread count.

mod bounds;
mod chain;
mod race;
mod scenario;

use thiserror::Error;

pub use bounds::{
    block_time_at_deviation, decay_factor, decay_per_block, fit_decay, half_life_blocks, recovery_blocks,
    deviation_envelope, oscillation_avg_bound,
};
pub use chain::{
    ensemble_stats, equilibrium_target, exp1, expected_solve_time, open_unit, simulate_chain, simulate_ensemble,
    simulate_run, stream_rng, target_from_f64, BlockSample, EnsembleStats, Trajectory, TrajectorySummary,
    RECOVERY_TOLERANCE,
};
pub use race::{
    simulate_double_spend_race, simulate_double_spend_race_premined, RaceEstimate, ABSORPTION_RELATIVE, WALK_CAP,
};
pub use scenario::{HashrateEvent, ScenarioSpec};

use crate::difficulty::DifficultyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Difficulty(#[from] DifficultyError),
}
