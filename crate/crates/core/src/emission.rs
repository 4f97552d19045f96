//! Block subsidy, cumulative supply and the emission timeline.

use serde::Serialize;
use thiserror::Error;

pub use crate::consensus::{Amount, COIN};
use crate::consensus::ChainParams;

/// Blocks per Julian year at 240 s spacing.
pub const BLOCKS_PER_YEAR: u64 = 131_490;
/// 365.25 days.
pub const SECONDS_PER_YEAR: u64 = 31_557_600;
/// Year of the genesis block, used only for approximate date labels.
pub const LAUNCH_YEAR: u64 = 2026;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EmissionError {
    #[error("cumulative supply exceeds max_money at height {height}")]
    SupplyOverflow { height: u64 },
}

/// Reward paid by the coinbase at `height`.
///
/// ```
/// use powlab::consensus::ChainParams;
/// use powlab::emission::block_subsidy;
/// let p = ChainParams::default();
/// assert_eq!(block_subsidy(&p, 0).to_string(), "25.00000000 LAT");
/// assert_eq!(block_subsidy(&p, 2_360_000).shors(), 19_531_250);
/// ```
pub fn block_subsidy(params: &ChainParams, height: u64) -> Amount {
    if params.warmup_blocks > 0 && height < params.warmup_blocks {
        return params.warmup_subsidy;
    }
    let halvings = height / params.halving_interval;
    if halvings >= 64 {
        return params.tail_emission;
    }
    Amount(params.initial_subsidy.0 >> halvings).max(params.tail_emission)
}

/// First height at which the subsidy is permanently the tail emission.
pub fn tail_onset_height(params: &ChainParams) -> u64 {
    let era = (0..64u32)
        .find(|&e| params.initial_subsidy.0 >> e <= params.tail_emission.0)
        .unwrap_or(64) as u64;
    (era * params.halving_interval).max(params.warmup_blocks)
}

/// Exact sum of subsidies over heights `0..=height`, without an upper bound check.
fn supply_through(params: &ChainParams, height: u64) -> u128 {
    let mut total: u128 = 0;
    let warm_end = params.warmup_blocks.min(height + 1);
    total += warm_end as u128 * params.warmup_subsidy.0 as u128;
    if height < params.warmup_blocks {
        return total;
    }
    let onset = tail_onset_height(params);
    let mut start = params.warmup_blocks;
    while start <= height && start < onset {
        let era_end = ((start / params.halving_interval + 1) * params.halving_interval - 1)
            .min(onset - 1)
            .min(height);
        let count = (era_end - start + 1) as u128;
        total += count * block_subsidy(params, start).0 as u128;
        start = era_end + 1;
    }
    if height >= start {
        total += (height - start + 1) as u128 * params.tail_emission.0 as u128;
    }
    total
}

/// Sum of all subsidies from genesis through `height` inclusive.
///
/// Fails with the first height whose running total passes `max_money`.
pub fn cumulative_supply(params: &ChainParams, height: u64) -> Result<Amount, EmissionError> {
    let total = supply_through(params, height);
    if total <= params.max_money.0 as u128 {
        return Ok(Amount(total as u64));
    }
    let (mut lo, mut hi) = (0u64, height);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if supply_through(params, mid) > params.max_money.0 as u128 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Err(EmissionError::SupplyOverflow { height: lo })
}

/// Supply mined before the tail emission begins.
pub fn supply_at_tail_onset(params: &ChainParams) -> Amount {
    let onset = tail_onset_height(params);
    if onset == 0 {
        return Amount::ZERO;
    }
    Amount(supply_through(params, onset - 1).min(u64::MAX as u128) as u64)
}

/// Tail emission paid over one year of blocks.
pub fn annual_tail_emission(params: &ChainParams) -> Amount {
    Amount(params.tail_emission.0 * BLOCKS_PER_YEAR)
}

/// Annual inflation `t` years after the tail begins.
///
/// ```
/// use powlab::consensus::ChainParams;
/// use powlab::emission::inflation_rate;
/// let pi0 = inflation_rate(&ChainParams::default(), 0.0);
/// assert!((pi0 * 100.0 - 0.0673).abs() < 1e-4);
/// ```
pub fn inflation_rate(params: &ChainParams, years_after_tail: f64) -> f64 {
    let s0 = supply_at_tail_onset(params).0 as f64;
    let annual = annual_tail_emission(params).0 as f64;
    annual / (s0 + annual * years_after_tail)
}

/// `S_0 / (R_min B)`: the offset in `pi(t) = 1 / (offset + t)`.
pub fn inflation_offset_years(params: &ChainParams) -> f64 {
    supply_at_tail_onset(params).0 as f64 / annual_tail_emission(params).0 as f64
}

/// Whole years of tail emission before `max_money` is reached.
pub fn max_money_year(params: &ChainParams) -> u64 {
    let s0 = supply_at_tail_onset(params).0;
    params.max_money.0.saturating_sub(s0) / annual_tail_emission(params).0
}

/// Expected seconds from genesis to `height` at target spacing.
pub fn height_to_time(params: &ChainParams, height: u64) -> u64 {
    let warm = height.min(params.warmup_blocks);
    warm * params.warmup_spacing + height.saturating_sub(params.warmup_blocks) * params.spacing
}

/// One phase of the emission timeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub phase: String,
    pub first_height: u64,
    /// `None` for the open-ended tail.
    pub last_height: Option<u64>,
    pub reward: Amount,
    pub block_time_s: u64,
    pub approx_date: String,
    /// Supply through `last_height`; `None` for the tail.
    pub cumulative_supply: Option<Amount>,
    /// Yearly addition, tail only.
    pub annual_addition: Option<Amount>,
}

fn year_at(params: &ChainParams, height: u64) -> u64 {
    LAUNCH_YEAR + (height_to_time(params, height) as f64 / SECONDS_PER_YEAR as f64).round() as u64
}

/// Warm-up, every halving era above the tail, then the tail.
pub fn emission_schedule(params: &ChainParams) -> Vec<ScheduleRow> {
    let mut rows = Vec::new();
    if params.warmup_blocks > 0 {
        let last = params.warmup_blocks - 1;
        let hours = height_to_time(params, params.warmup_blocks) as f64 / 3600.0;
        rows.push(ScheduleRow {
            phase: "Warm-up".into(),
            first_height: 0,
            last_height: Some(last),
            reward: params.warmup_subsidy,
            block_time_s: params.warmup_spacing,
            approx_date: format!("{LAUNCH_YEAR} ({hours:.1}h)"),
            cumulative_supply: Some(Amount(supply_through(params, last) as u64)),
            annual_addition: None,
        });
    }
    let onset = tail_onset_height(params);
    let mut start = params.warmup_blocks;
    while start < onset {
        let era = start / params.halving_interval;
        let last = ((era + 1) * params.halving_interval - 1).min(onset - 1);
        rows.push(ScheduleRow {
            phase: format!("Halving {era}"),
            first_height: start,
            last_height: Some(last),
            reward: block_subsidy(params, start),
            block_time_s: params.spacing,
            approx_date: format!("{}--{}", year_at(params, start), year_at(params, last)),
            cumulative_supply: Some(Amount(supply_through(params, last) as u64)),
            annual_addition: None,
        });
        start = last + 1;
    }
    rows.push(ScheduleRow {
        phase: "Tail".into(),
        first_height: onset,
        last_height: None,
        reward: params.tail_emission,
        block_time_s: params.spacing,
        approx_date: format!("{}+", year_at(params, onset)),
        cumulative_supply: None,
        annual_addition: Some(annual_tail_emission(params)),
    });
    rows
}

/// LAT with trailing zeros dropped: `0.1953125`, `25`.
pub fn format_lat(amount: Amount) -> String {
    let whole = amount.0 / COIN;
    let frac = amount.0 % COIN;
    if frac == 0 {
        return whole.to_string();
    }
    let digits = format!("{frac:08}");
    format!("{whole}.{}", digits.trim_end_matches('0'))
}

fn group_thousands(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// LAT with thousands separators: `28,897,312.5`.
pub fn format_lat_grouped(amount: Amount) -> String {
    let plain = format_lat(amount);
    match plain.split_once('.') {
        Some((w, f)) => format!("{}.{f}", group_thousands(w.parse().unwrap())),
        None => group_thousands(amount.0 / COIN),
    }
}

fn blocks_label(row: &ScheduleRow) -> (String, String) {
    let first = group_thousands(row.first_height);
    match row.last_height {
        Some(l) => (format!("{first}--{}", group_thousands(l)), l.to_string()),
        None => (format!("{first}+"), String::new()),
    }
}

/// Markdown table with the columns Phase, Blocks, Reward, Block Time, Approx. Date, Cumul. Supply.
pub fn schedule_markdown(rows: &[ScheduleRow]) -> String {
    let mut out = String::from(
        "| Phase | Blocks | Reward | Block Time | Approx. Date | Cumul. Supply |\n\
         |---|---|---|---|---|---|\n",
    );
    for row in rows {
        let supply = match (row.cumulative_supply, row.annual_addition) {
            (Some(s), _) => format_lat_grouped(s),
            (None, Some(a)) => format!("+{}/yr", format_lat_grouped(a)),
            (None, None) => String::new(),
        };
        out.push_str(&format!(
            "| {} | {} | {} LAT | {}s | {} | {} |\n",
            row.phase,
            blocks_label(row).0,
            format_lat(row.reward),
            row.block_time_s,
            row.approx_date,
            supply
        ));
    }
    out
}

/// CSV in the same column order as the markdown table, with plain numbers.
pub fn schedule_csv(rows: &[ScheduleRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "phase",
        "first_height",
        "last_height",
        "reward_lat",
        "block_time_s",
        "approx_date",
        "cumulative_supply_lat",
        "annual_addition_lat",
    ])
    .expect("in-memory write");
    for row in rows {
        w.write_record([
            row.phase.clone(),
            row.first_height.to_string(),
            blocks_label(row).1,
            format_lat(row.reward),
            row.block_time_s.to_string(),
            row.approx_date.clone(),
            row.cumulative_supply.map(format_lat).unwrap_or_default(),
            row.annual_addition.map(format_lat).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf-8")
}
