//! Targets, compact encoding, chain parameters and chain work.

mod amount;
mod compact;
mod params;
mod target;
mod work;

pub use amount::{Amount, COIN};
pub use compact::{compress_compact, expand_compact, CompactBits, CompactError};
pub use params::{max_block_weight, target_spacing, ChainParams, ParamsError, WeightStage};
pub use target::{ArithmeticError, ParseTargetError, Target256};
pub use work::{block_work, chain_work, ZeroTargetError};

use serde::{Deserialize, Serialize};

/// One block as seen by difficulty adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub height: u64,
    /// Unix seconds; may go backwards between blocks.
    pub timestamp: i64,
    pub target: Target256,
}
