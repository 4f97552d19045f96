//! Block-by-block chain simulation against live LWMA-1 difficulty.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::scenario::ScenarioSpec;
use super::SimError;
use crate::consensus::{target_spacing, BlockRecord, ChainParams, Target256};
use crate::difficulty::LwmaWindow;

/// 2^256 as a float.
const TWO_POW_256: f64 = 1.157_920_892_373_162e77;

/// Generator for run `stream` of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw strictly inside (0, 1) from the top 53 bits of one word.
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Unit-mean exponential variate by inversion.
pub fn exp1(rng: &mut impl RngCore) -> f64 {
    -open_unit(rng).ln()
}

/// Nearest 256-bit integer to a non-negative float, saturating at the top.
pub fn target_from_f64(x: f64) -> Target256 {
    if !(x >= 1.0) {
        return Target256::ZERO;
    }
    if x >= TWO_POW_256 {
        return Target256::MAX;
    }
    if x < 18_446_744_073_709_551_616.0 {
        return Target256::from_u64(x as u64);
    }
    let exp = x.log2().floor() as i32 - 52;
    let mantissa = (x / 2f64.powi(exp)) as u64;
    Target256::from_u64(mantissa) << exp as u32
}

/// Target at which `hashrate` finds blocks every `spacing` seconds on average.
pub fn equilibrium_target(params: &ChainParams, hashrate: f64, spacing: u64) -> Result<Target256, SimError> {
    let limit = params.pow_limit_target().map_err(|e| SimError::Config(e.to_string()))?;
    Ok(target_from_f64(TWO_POW_256 / (hashrate * spacing as f64)).min(limit).max(Target256::ONE))
}

/// Mean seconds to solve `target` with `hashrate`.
pub fn expected_solve_time(target: &Target256, hashrate: f64) -> f64 {
    TWO_POW_256 / (target.to_f64() * hashrate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSample {
    pub height: u64,
    pub solve_time_s: f64,
    pub target: Target256,
    /// Expected solve time over target spacing, minus one.
    pub deviation: f64,
    pub expected_time_s: f64,
    pub hashrate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    /// Blocks after the first event until `|deviation|` halves.
    pub half_life_blocks: Option<u64>,
    /// Blocks after the first event until `|deviation|` drops below the tolerance.
    pub recovery_blocks: Option<u64>,
    pub recovery_tolerance: f64,
    pub mean_block_time_s: f64,
    pub mean_expected_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub blocks: Vec<BlockSample>,
    pub summary: TrajectorySummary,
}

/// Tolerance used for the recovery summary.
pub const RECOVERY_TOLERANCE: f64 = 0.07;

impl Trajectory {
    pub fn deviations(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.deviation).collect()
    }

    /// CSV with columns height, solve_time_s, target_hex, deviation.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["height", "solve_time_s", "target_hex", "deviation"]).expect("in-memory write");
        for b in &self.blocks {
            w.write_record([
                b.height.to_string(),
                b.solve_time_s.to_string(),
                b.target.to_hex(),
                b.deviation.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf-8")
    }

    /// `|mean expected block time / T - 1|` over blocks `from..`.
    pub fn time_averaged_deviation(&self, from: usize, spacing: f64) -> f64 {
        let tail = &self.blocks[from.min(self.blocks.len())..];
        let mean = tail.iter().map(|b| b.expected_time_s).sum::<f64>() / tail.len() as f64;
        (mean / spacing - 1.0).abs()
    }
}

fn first_event_offset(spec: &ScenarioSpec) -> Option<u64> {
    (0..spec.horizon).find(|&m| spec.hashrate_at(m) != spec.base_hashrate)
}

fn summarize(spec: &ScenarioSpec, blocks: &[BlockSample]) -> TrajectorySummary {
    let n = blocks.len() as f64;
    let mut summary = TrajectorySummary {
        half_life_blocks: None,
        recovery_blocks: None,
        recovery_tolerance: RECOVERY_TOLERANCE,
        mean_block_time_s: blocks.iter().map(|b| b.solve_time_s).sum::<f64>() / n,
        mean_expected_time_s: blocks.iter().map(|b| b.expected_time_s).sum::<f64>() / n,
    };
    if let Some(n0) = first_event_offset(spec) {
        let after = &blocks[n0 as usize..];
        let eps0 = after[0].deviation.abs();
        summary.half_life_blocks = after.iter().position(|b| b.deviation.abs() <= eps0 / 2.0).map(|m| m as u64);
        summary.recovery_blocks =
            after.iter().position(|b| b.deviation.abs() < RECOVERY_TOLERANCE).map(|m| m as u64);
    }
    summary
}

/// Runs one scenario on its seed's stream 0.
pub fn simulate_chain(spec: &ScenarioSpec) -> Result<Trajectory, SimError> {
    simulate_run(spec, 0)
}

/// Runs one scenario on stream `run` of its seed.
///
/// The window is pre-filled with `N + 1` blocks at the equilibrium target
/// spaced exactly `T` apart. Timestamps are whole seconds of the accumulated
/// real solve times.
pub fn simulate_run(spec: &ScenarioSpec, run: u64) -> Result<Trajectory, SimError> {
    spec.validate()?;
    let params = &spec.params;
    let n = params.lwma_window;
    let start = spec.start_height();
    let first = start - spec.burn_in;
    let mut rng = stream_rng(spec.seed, run);

    let tau = equilibrium_target(params, spec.base_hashrate, target_spacing(params, first))?;
    let mut window = LwmaWindow::new(params);
    let mut clock = 0.0f64;
    for h in first - n - 1..first {
        if h > first - n - 1 {
            clock += target_spacing(params, h) as f64;
        }
        window
            .push(BlockRecord { height: h, timestamp: clock as i64, target: tau })
            .map_err(SimError::Difficulty)?;
    }

    let mut blocks = Vec::with_capacity(spec.horizon as usize);
    for h in first..start + spec.horizon {
        let target = window.next_target(params)?;
        let hashrate = if h < start { spec.base_hashrate } else { spec.hashrate_at(h - start) };
        let expected = expected_solve_time(&target, hashrate);
        let solve = expected * exp1(&mut rng);
        clock += solve;
        window.push(BlockRecord { height: h, timestamp: clock.floor() as i64, target })?;
        if h >= start {
            blocks.push(BlockSample {
                height: h,
                solve_time_s: solve,
                target,
                deviation: expected / target_spacing(params, h) as f64 - 1.0,
                expected_time_s: expected,
                hashrate,
            });
        }
    }
    let summary = summarize(spec, &blocks);
    Ok(Trajectory { blocks, summary })
}

/// Independent runs of one scenario, run `r` on stream `r`, in run order.
pub fn simulate_ensemble(spec: &ScenarioSpec, runs: u64) -> Result<Vec<Trajectory>, SimError> {
    spec.validate()?;
    (0..runs).into_par_iter().map(|r| simulate_run(spec, r)).collect()
}

/// Across-run means of the deviation at each block offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub runs: usize,
    pub mean_deviation: Vec<f64>,
    pub mean_abs_deviation: Vec<f64>,
}

pub fn ensemble_stats(runs: &[Trajectory]) -> EnsembleStats {
    let len = runs.iter().map(|t| t.blocks.len()).min().unwrap_or(0);
    let count = runs.len() as f64;
    let mut mean = vec![0.0; len];
    let mut mean_abs = vec![0.0; len];
    for t in runs {
        for (i, b) in t.blocks[..len].iter().enumerate() {
            mean[i] += b.deviation / count;
            mean_abs[i] += b.deviation.abs() / count;
        }
    }
    EnsembleStats { runs: runs.len(), mean_deviation: mean, mean_abs_deviation: mean_abs }
}
