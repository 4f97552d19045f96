//! Consensus arithmetic, economic models and a seeded simulator for an
//! LWMA-1 proof-of-work chain with a warm-up period and tail emission.
//!
//! ```
//! use powlab::consensus::ChainParams;
//! use powlab::emission::cumulative_supply;
//!
//! let params = ChainParams::default();
//! let s = cumulative_supply(&params, 294_999).unwrap();
//! assert_eq!(s.to_string(), "14608250.00000000 LAT");
//! ```

// `!(x > 0.0)` is how inputs reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consensus;
pub mod difficulty;
pub mod economics;
pub mod emission;
pub mod report;
pub mod security;
pub mod sim;

use thiserror::Error;

/// Any error the library can return.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Params(#[from] consensus::ParamsError),
    #[error(transparent)]
    Compact(#[from] consensus::CompactError),
    #[error(transparent)]
    Arithmetic(#[from] consensus::ArithmeticError),
    #[error(transparent)]
    ZeroTarget(#[from] consensus::ZeroTargetError),
    #[error(transparent)]
    Difficulty(#[from] difficulty::DifficultyError),
    #[error(transparent)]
    Emission(#[from] emission::EmissionError),
    #[error(transparent)]
    Security(#[from] security::SecurityError),
    #[error(transparent)]
    Economics(#[from] economics::EconomicsError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/targets.md")]
    mod targets {}
    #[doc = include_str!("../../../book/src/difficulty.md")]
    mod difficulty {}
    #[doc = include_str!("../../../book/src/emission.md")]
    mod emission {}
    #[doc = include_str!("../../../book/src/security.md")]
    mod security {}
    #[doc = include_str!("../../../book/src/economics.md")]
    mod economics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
}
