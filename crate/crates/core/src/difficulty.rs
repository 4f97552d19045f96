//! LWMA-1 per-block difficulty adjustment.
//!
//! The newest solve time gets weight `N`, the oldest weight 1. Each window
//! target is divided by `N` before summing, exactly as the reference C++ does,
//! so results match it to the last bit.

use std::collections::VecDeque;

use thiserror::Error;

use crate::consensus::{target_spacing, BlockRecord, ChainParams, CompactError, Target256};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DifficultyError {
    #[error("need {needed} blocks of history before height {next_height}, got {got}")]
    InsufficientHistory { next_height: u64, needed: usize, got: usize },
    #[error("window heights are not consecutive at height {height}")]
    NonConsecutive { height: u64 },
    #[error("window ends at height {last} but next height is {next_height}")]
    Misaligned { last: u64, next_height: u64 },
    #[error(transparent)]
    PowLimit(#[from] CompactError),
}

/// Which overflow-avoiding evaluation order produced a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Warm-up boundary or early chain: powLimit returned without computation.
    Reset,
    /// `sumTarget >> 192 > 0`: divide by `k`, then multiply.
    DivideFirst,
    /// Multiply by the weighted sum, then divide by `k`.
    MultiplyFirst,
}

/// Intermediate values of one LWMA evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LwmaTrace {
    pub next_target: Target256,
    pub branch: Branch,
    pub sum_target: Target256,
    /// After the `k/10` floor.
    pub weighted_solvetime_sum: i64,
    pub k: u64,
}

/// `min(max(dt, -6T), 6T)`.
pub fn clamp_solvetime(dt: i64, spacing: u64) -> i64 {
    let bound = 6 * spacing as i64;
    dt.clamp(-bound, bound)
}

/// Next target for the block at `next_height`.
///
/// `window` must end at `next_height - 1`; only its last `N + 1` records are
/// read. Before height `N + 1` and exactly at the warm-up boundary the result
/// is powLimit.
pub fn lwma_next_target(
    params: &ChainParams,
    window: &[BlockRecord],
    next_height: u64,
) -> Result<Target256, DifficultyError> {
    lwma_trace(params, window, next_height).map(|t| t.next_target)
}

/// [`lwma_next_target`] with its intermediate values exposed.
pub fn lwma_trace(
    params: &ChainParams,
    window: &[BlockRecord],
    next_height: u64,
) -> Result<LwmaTrace, DifficultyError> {
    let pow_limit = params.pow_limit_target()?;
    let n = params.lwma_window as usize;
    let k = params.lwma_k(next_height);
    let reset = LwmaTrace {
        next_target: pow_limit,
        branch: Branch::Reset,
        sum_target: Target256::ZERO,
        weighted_solvetime_sum: 0,
        k,
    };
    if params.warmup_blocks > 0 && next_height == params.warmup_blocks {
        return Ok(reset);
    }
    if next_height <= params.lwma_window {
        return Ok(reset);
    }
    if window.len() < n + 1 {
        return Err(DifficultyError::InsufficientHistory {
            next_height,
            needed: n + 1,
            got: window.len(),
        });
    }
    let recs = &window[window.len() - n - 1..];
    let last = recs[n].height;
    if last + 1 != next_height {
        return Err(DifficultyError::Misaligned { last, next_height });
    }
    if let Some(pair) = recs.windows(2).find(|p| p[1].height != p[0].height + 1) {
        return Err(DifficultyError::NonConsecutive { height: pair[1].height });
    }

    let spacing = target_spacing(params, next_height);
    let mut sum_target = Target256::ZERO;
    let mut weighted: i64 = 0;
    for i in (1..=n).rev() {
        let cur = &recs[i];
        let prev = &recs[i - 1];
        let solvetime = clamp_solvetime(cur.timestamp.saturating_sub(prev.timestamp), spacing);
        weighted += solvetime * i as i64;
        let share = cur.target.checked_div_u64(n as u64).expect("n > 0");
        // each share is at most MAX / N, so N of them cannot overflow
        sum_target = sum_target.checked_add(&share).expect("sum of N shares fits");
    }
    let floor = (k / 10) as i64;
    if weighted < floor {
        weighted = floor;
    }
    let w = weighted as u64;

    let (raw, branch) = if !(sum_target >> 192).is_zero() {
        let quotient = sum_target.checked_div_u64(k).expect("k > 0");
        // the reference wraps here; saturating keeps the final cap meaningful
        let t = quotient.checked_mul_u64(w).unwrap_or(Target256::MAX);
        (t, Branch::DivideFirst)
    } else {
        let product = sum_target.checked_mul_u64(w).expect("2^192 * 2^64 fits");
        (product.checked_div_u64(k).expect("k > 0"), Branch::MultiplyFirst)
    };
    Ok(LwmaTrace {
        next_target: raw.min(pow_limit),
        branch,
        sum_target,
        weighted_solvetime_sum: weighted,
        k,
    })
}

/// A rolling window of the most recent `N + 1` blocks.
#[derive(Debug, Clone)]
pub struct LwmaWindow {
    records: VecDeque<BlockRecord>,
    capacity: usize,
}

impl LwmaWindow {
    pub fn new(params: &ChainParams) -> Self {
        let capacity = params.lwma_window as usize + 1;
        LwmaWindow { records: VecDeque::with_capacity(capacity + 1), capacity }
    }

    /// Builds a window from records, oldest first.
    pub fn from_records(
        params: &ChainParams,
        records: impl IntoIterator<Item = BlockRecord>,
    ) -> Result<Self, DifficultyError> {
        let mut w = Self::new(params);
        for r in records {
            w.push(r)?;
        }
        Ok(w)
    }

    /// Appends the next block, evicting the oldest once full.
    pub fn push(&mut self, record: BlockRecord) -> Result<(), DifficultyError> {
        if let Some(last) = self.records.back() {
            if record.height != last.height + 1 {
                return Err(DifficultyError::NonConsecutive { height: record.height });
            }
        }
        self.records.push_back(record);
        if self.records.len() > self.capacity {
            self.records.pop_front();
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.records.len() == self.capacity
    }

    pub fn tip(&self) -> Option<&BlockRecord> {
        self.records.back()
    }

    pub fn records(&mut self) -> &[BlockRecord] {
        self.records.make_contiguous()
    }

    /// Target for the block after the current tip.
    pub fn next_target(&mut self, params: &ChainParams) -> Result<Target256, DifficultyError> {
        let next_height = self.tip().map(|r| r.height + 1).unwrap_or(0);
        lwma_next_target(params, self.records.make_contiguous(), next_height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(params: &ChainParams, start: u64, solvetimes: &[i64], target: Target256) -> Vec<BlockRecord> {
        let mut ts = 1_700_000_000i64;
        let mut out = vec![BlockRecord { height: start, timestamp: ts, target }];
        for (i, st) in solvetimes.iter().enumerate() {
            ts += st;
            out.push(BlockRecord { height: start + 1 + i as u64, timestamp: ts, target });
        }
        assert_eq!(out.len(), params.lwma_window as usize + 1);
        out
    }

    #[test]
    fn clamp() {
        assert_eq!(clamp_solvetime(240, 240), 240);
        assert_eq!(clamp_solvetime(10_000, 240), 1_440);
        assert_eq!(clamp_solvetime(-10_000, 240), -1_440);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = ChainParams::default();
        let tau = Target256::from_u64(120 * 1_000_003) << 100;
        let recs = window(&p, 10_000, &[240; 120], tau);
        let trace = lwma_trace(&p, &recs, 10_121).unwrap();
        assert_eq!(trace.branch, Branch::MultiplyFirst);
        assert_eq!(trace.next_target, tau);
    }

    #[test]
    fn instamine_burst_hits_the_floor() {
        let p = ChainParams::default();
        let tau = Target256::from_u64(120 * 10 * 7) << 120;
        let recs = window(&p, 10_000, &[0; 120], tau);
        let trace = lwma_trace(&p, &recs, 10_121).unwrap();
        assert_eq!(trace.weighted_solvetime_sum, (p.lwma_k(10_121) / 10) as i64);
        assert_eq!(trace.next_target, tau.checked_div_u64(10).unwrap());
    }

    #[test]
    fn warmup_boundary_and_early_chain_reset() {
        let p = ChainParams::default();
        let limit = p.pow_limit_target().unwrap();
        assert_eq!(lwma_next_target(&p, &[], 5_670).unwrap(), limit);
        assert_eq!(lwma_next_target(&p, &[], 1).unwrap(), limit);
        assert_eq!(lwma_next_target(&p, &[], 120).unwrap(), limit);
        assert!(matches!(
            lwma_next_target(&p, &[], 121),
            Err(DifficultyError::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn near_pow_limit_divides_first_and_caps() {
        let p = ChainParams::default();
        let limit = p.pow_limit_target().unwrap();
        let recs = window(&p, 10_000, &[1_000; 120], limit);
        let trace = lwma_trace(&p, &recs, 10_121).unwrap();
        assert_eq!(trace.branch, Branch::DivideFirst);
        assert_eq!(trace.next_target, limit);
    }

    #[test]
    fn misaligned_and_gapped_windows() {
        let p = ChainParams::default();
        let tau = Target256::ONE << 200;
        let recs = window(&p, 10_000, &[240; 120], tau);
        assert!(matches!(lwma_next_target(&p, &recs, 10_122), Err(DifficultyError::Misaligned { .. })));
        let mut gapped = recs.clone();
        gapped[5].height += 100;
        assert!(matches!(lwma_next_target(&p, &gapped, 10_121), Err(DifficultyError::NonConsecutive { .. })));
    }

    #[test]
    fn rolling_window_matches_slice() {
        let p = ChainParams::default();
        let tau = Target256::ONE << 200;
        let mut solvetimes = vec![240i64; 120];
        solvetimes[3] = 17;
        let recs = window(&p, 10_000, &solvetimes, tau);
        let mut w = LwmaWindow::new(&p);
        let mut early = recs[0];
        early.height -= 1;
        w.push(early).unwrap();
        for r in &recs {
            w.push(*r).unwrap();
        }
        assert!(w.is_full());
        assert_eq!(w.next_target(&p).unwrap(), lwma_next_target(&p, &recs, 10_121).unwrap());
        assert!(w.push(recs[0]).is_err());
    }
}
