//! Consensus constants and their TOML representation.
//!
//! Every field is optional in a config file; missing keys take the mainnet
//! defaults.
//!
//! ```toml
//! warmup_blocks = 5670
//! warmup_spacing = 53
//! spacing = 240
//! warmup_subsidy = 2500000000     # shors
//! initial_subsidy = 5000000000
//! halving_interval = 295000
//! tail_emission = 15000000
//! pow_limit = 0x207fffff
//! lwma_window = 120
//! max_money = 4200000000000000
//! coinbase_maturity = 100
//!
//! [[weight_stages]]
//! height = 0
//! max_weight = 11000000
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::amount::Amount;
use super::compact::{CompactBits, CompactError};
use super::target::Target256;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("invalid chain parameters: {0}")]
    Invalid(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing chain parameters: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    PowLimit(#[from] CompactError),
}

/// A block-weight limit that applies from `height` onwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightStage {
    pub height: u64,
    pub max_weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub warmup_blocks: u64,
    /// Seconds.
    pub warmup_spacing: u64,
    /// Seconds.
    pub spacing: u64,
    pub warmup_subsidy: Amount,
    pub initial_subsidy: Amount,
    pub halving_interval: u64,
    pub tail_emission: Amount,
    pub pow_limit: CompactBits,
    pub lwma_window: u64,
    pub weight_stages: Vec<WeightStage>,
    pub max_money: Amount,
    pub coinbase_maturity: u64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            warmup_blocks: 5_670,
            warmup_spacing: 53,
            spacing: 240,
            warmup_subsidy: Amount::from_lat(25),
            initial_subsidy: Amount::from_lat(50),
            halving_interval: 295_000,
            tail_emission: Amount(15_000_000),
            pow_limit: CompactBits::POW_LIMIT,
            lwma_window: 120,
            weight_stages: vec![
                WeightStage { height: 0, max_weight: 11_000_000 },
                WeightStage { height: 50_000, max_weight: 28_000_000 },
                WeightStage { height: 100_000, max_weight: 56_000_000 },
            ],
            max_money: Amount::from_lat(42_000_000),
            coinbase_maturity: 100,
        }
    }
}

impl ChainParams {
    pub fn from_toml_str(s: &str) -> Result<Self, ParamsError> {
        let params: ChainParams = toml::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParamsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ParamsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("chain parameters always serialize")
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let invalid = |msg: &str| Err(ParamsError::Invalid(msg.to_string()));
        // warm-up may be disabled entirely, in which case its spacing and subsidy are unused
        if self.warmup_blocks > 0 && (self.warmup_spacing == 0 || self.warmup_subsidy == Amount::ZERO) {
            return invalid("warm-up spacing and subsidy must be positive");
        }
        if self.spacing == 0 || self.halving_interval == 0 || self.lwma_window == 0 {
            return invalid("spacing, halving_interval and lwma_window must be positive");
        }
        if self.initial_subsidy == Amount::ZERO || self.tail_emission == Amount::ZERO {
            return invalid("subsidies must be positive");
        }
        if self.max_money == Amount::ZERO || self.coinbase_maturity == 0 {
            return invalid("max_money and coinbase_maturity must be positive");
        }
        if self.tail_emission >= self.initial_subsidy {
            return invalid("tail_emission must be below initial_subsidy");
        }
        if self.warmup_subsidy > self.initial_subsidy {
            return invalid("warmup_subsidy must not exceed initial_subsidy");
        }
        if self.lwma_window > u32::MAX as u64 / 2 {
            return invalid("lwma_window too large");
        }
        if self.weight_stages.is_empty() || self.weight_stages[0].height != 0 {
            return invalid("weight_stages must start at height 0");
        }
        for pair in self.weight_stages.windows(2) {
            if pair[1].height <= pair[0].height {
                return invalid("weight stage heights must be strictly increasing");
            }
            if pair[1].max_weight < pair[0].max_weight {
                return invalid("weight stage limits must be non-decreasing");
            }
        }
        if self.weight_stages.iter().any(|s| s.max_weight == 0) {
            return invalid("weight limits must be positive");
        }
        let limit = self.pow_limit_target()?;
        if limit.is_zero() {
            return invalid("pow_limit must be positive");
        }
        Ok(())
    }

    /// The easiest permitted target.
    pub fn pow_limit_target(&self) -> Result<Target256, CompactError> {
        self.pow_limit.expand()
    }

    /// `k = N(N+1)T/2` for the spacing in force at `height`.
    pub fn lwma_k(&self, height: u64) -> u64 {
        let n = self.lwma_window;
        n * (n + 1) * target_spacing(self, height) / 2
    }
}

/// Target block interval in seconds.
pub fn target_spacing(params: &ChainParams, height: u64) -> u64 {
    if height < params.warmup_blocks {
        params.warmup_spacing
    } else {
        params.spacing
    }
}

/// Weight limit of the latest stage already active at `height`.
pub fn max_block_weight(params: &ChainParams, height: u64) -> u64 {
    params
        .weight_stages
        .iter()
        .take_while(|s| s.height <= height)
        .last()
        .map(|s| s.max_weight)
        .unwrap_or(0)
}
