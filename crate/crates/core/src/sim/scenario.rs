//! Declarative hashrate scenarios.
//!
//! ```toml
//! base_hashrate = 1.0e6   # H/s
//! horizon = 1000          # recorded blocks
//! seed = 7
//! burn_in = 240           # unrecorded blocks mined at base hashrate first
//!
//! [[events]]
//! kind = "step"
//! at = 100                # blocks after the first recorded block
//! multiplier = 0.1
//!
//! [[events]]
//! kind = "cloud_ban"
//! at = 600
//! share = 0.3
//! ```
//!
//! Other event kinds: `oscillation` (`start`, `period`, `multiplier`, optional
//! `end`) and `exodus` (`at`, `fraction`). An optional `[params]` table
//! overrides chain parameters with the same keys as a parameter file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::consensus::ChainParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HashrateEvent {
    /// Multiply hashrate by `multiplier` from block `at` on.
    Step { at: u64, multiplier: f64 },
    /// Alternate between full and `multiplier` hashrate, each half of `period`.
    Oscillation {
        start: u64,
        period: u64,
        multiplier: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end: Option<u64>,
    },
    /// A share `fraction` of miners leaves at `at`.
    Exodus { at: u64, fraction: f64 },
    /// Cloud-hosted miners, `share` of hashrate, are banned at `at`.
    CloudBan { at: u64, share: f64 },
}

impl HashrateEvent {
    fn trigger(&self) -> u64 {
        match self {
            HashrateEvent::Step { at, .. }
            | HashrateEvent::Exodus { at, .. }
            | HashrateEvent::CloudBan { at, .. } => *at,
            HashrateEvent::Oscillation { start, .. } => *start,
        }
    }

    /// Factor this event applies at block offset `m`.
    pub fn factor_at(&self, m: u64) -> f64 {
        match *self {
            HashrateEvent::Step { at, multiplier } if m >= at => multiplier,
            HashrateEvent::Exodus { at, fraction } if m >= at => 1.0 - fraction,
            HashrateEvent::CloudBan { at, share } if m >= at => 1.0 - share,
            HashrateEvent::Oscillation { start, period, multiplier, end }
                if m >= start && end.map_or(true, |e| m < e) =>
            {
                if (m - start) % period < period / 2 {
                    1.0
                } else {
                    multiplier
                }
            }
            _ => 1.0,
        }
    }

    fn multiplier(&self) -> f64 {
        match *self {
            HashrateEvent::Step { multiplier, .. } | HashrateEvent::Oscillation { multiplier, .. } => multiplier,
            HashrateEvent::Exodus { fraction, .. } => 1.0 - fraction,
            HashrateEvent::CloudBan { share, .. } => 1.0 - share,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    /// H/s before any event.
    pub base_hashrate: f64,
    /// Recorded blocks.
    pub horizon: u64,
    pub seed: u64,
    #[serde(default)]
    pub burn_in: u64,
    /// Height of the first recorded block; defaults to the first height that
    /// leaves room for the burn-in and a full window after the warm-up.
    #[serde(default)]
    pub start_height: Option<u64>,
    #[serde(default)]
    pub events: Vec<HashrateEvent>,
    #[serde(default)]
    pub params: ChainParams,
}

impl ScenarioSpec {
    /// Constant hashrate scenario.
    pub fn constant(base_hashrate: f64, horizon: u64, seed: u64) -> Self {
        ScenarioSpec {
            name: String::new(),
            base_hashrate,
            horizon,
            seed,
            burn_in: 0,
            start_height: None,
            events: Vec::new(),
            params: ChainParams::default(),
        }
    }

    pub fn with_event(mut self, event: HashrateEvent) -> Self {
        self.events.push(event);
        self
    }

    pub fn with_burn_in(mut self, blocks: u64) -> Self {
        self.burn_in = blocks;
        self
    }

    pub fn from_toml_str(s: &str) -> Result<Self, SimError> {
        let spec: ScenarioSpec = toml::from_str(s).map_err(|e| SimError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn start_height(&self) -> u64 {
        self.start_height
            .unwrap_or(self.params.warmup_blocks + self.params.lwma_window + 1 + self.burn_in)
    }

    /// Hashrate at block offset `m` (0 is the first recorded block).
    pub fn hashrate_at(&self, m: u64) -> f64 {
        self.events.iter().fold(self.base_hashrate, |h, e| h * e.factor_at(m))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        self.params.validate().map_err(|e| SimError::Config(e.to_string()))?;
        if !(self.base_hashrate > 0.0 && self.base_hashrate.is_finite()) {
            return bad("base_hashrate must be positive".into());
        }
        let n = self.params.lwma_window;
        if self.horizon < n + 1 {
            return bad(format!("horizon {} is shorter than the window plus one ({})", self.horizon, n + 1));
        }
        if self.start_height() < n + 1 + self.burn_in {
            return bad(format!("start_height must be at least {}", n + 1 + self.burn_in));
        }
        for e in &self.events {
            if !(e.multiplier() > 0.0 && e.multiplier().is_finite()) {
                return bad(format!("event {e:?} leaves a non-positive hashrate"));
            }
            if let HashrateEvent::Oscillation { period, .. } = e {
                if *period < 2 {
                    return bad("oscillation period must be at least 2 blocks".into());
                }
            }
        }
        if self.events.windows(2).any(|w| w[1].trigger() < w[0].trigger()) {
            return bad("events must be sorted by trigger height".into());
        }
        Ok(())
    }
}
