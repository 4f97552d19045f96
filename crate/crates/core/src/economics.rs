//! Miner payoffs, defection dynamics and security-budget arithmetic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::{Amount, ChainParams};
use crate::emission::{block_subsidy, BLOCKS_PER_YEAR};

/// Dedicated-node hashrate used to express botnets as node counts.
pub const DEFAULT_NODE_HASHRATE: f64 = 6_667.0;

/// Payoff of a miner that switches off.
pub const DEFECTION_PAYOFF: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomicsError {
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("too many miners for exhaustive search: {0} (limit 20)")]
    TooManyMiners(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerSpec {
    pub id: String,
    /// H/s.
    pub hashrate: f64,
    /// USD spent per block interval while mining.
    pub cost_per_block: f64,
}

impl MinerSpec {
    pub fn new(id: impl Into<String>, hashrate: f64, cost_per_block: f64) -> Self {
        MinerSpec { id: id.into(), hashrate, cost_per_block }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// USD per LAT.
    pub price: f64,
    /// LAT per block.
    pub fees_per_block: f64,
    /// LAT per block.
    pub subsidy: f64,
    /// LAT squared.
    pub fee_variance: f64,
}

impl MarketState {
    /// USD value of one block: `(R_s + F) p`.
    pub fn block_value(&self) -> f64 {
        (self.subsidy + self.fees_per_block) * self.price
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub node_watts: f64,
    pub usd_per_kwh: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel { node_watts: 100.0, usd_per_kwh: 0.12 }
    }
}

/// `alpha (R_s + F) p - c`.
pub fn miner_payoff_honest(alpha: f64, market: &MarketState, cost: f64) -> f64 {
    alpha * market.block_value() - cost
}

/// kWh drawn by one node over `duration_s` seconds.
pub fn energy_kwh(pm: &PowerModel, duration_s: f64) -> f64 {
    pm.node_watts * duration_s / 3_600_000.0
}

/// Electricity cost of running one node for `duration_s` seconds.
///
/// ```
/// use powlab::economics::{marginal_cost_per_block, PowerModel};
/// let c = marginal_cost_per_block(&PowerModel::default(), 2_400.0);
/// assert!((c - 0.008).abs() < 1e-12);
/// ```
pub fn marginal_cost_per_block(pm: &PowerModel, duration_s: f64) -> f64 {
    energy_kwh(pm, duration_s) * pm.usd_per_kwh
}

/// LAT price at which one block pays for `energy_cost` USD.
pub fn break_even_price(subsidy: Amount, energy_cost: f64) -> Result<f64, EconomicsError> {
    if subsidy == Amount::ZERO {
        return Err(EconomicsError::Domain("subsidy must be positive".into()));
    }
    Ok(energy_cost / subsidy.as_lat())
}

/// Solo-mining economics for one node in a network of identical nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoloMining {
    pub network_size: u64,
    pub expected_days: f64,
    pub energy_kwh: f64,
    pub cost_usd: f64,
    pub break_even_usd: f64,
}

/// A node finds one block in `network_size` on average, so it burns power for
/// `network_size` block intervals per block found.
pub fn solo_mining(
    pm: &PowerModel,
    spacing_s: u64,
    network_size: u64,
    reward: Amount,
) -> Result<SoloMining, EconomicsError> {
    let duration = spacing_s as f64 * network_size as f64;
    let cost = marginal_cost_per_block(pm, duration);
    Ok(SoloMining {
        network_size,
        expected_days: duration / 86_400.0,
        energy_kwh: energy_kwh(pm, duration),
        cost_usd: cost,
        break_even_usd: break_even_price(reward, cost)?,
    })
}

fn payoffs(miners: &[MinerSpec], alive: &[bool], market: &MarketState) -> Vec<Option<f64>> {
    let total: f64 = miners.iter().zip(alive).filter(|(_, a)| **a).map(|(m, _)| m.hashrate).sum();
    miners
        .iter()
        .zip(alive)
        .map(|(m, a)| a.then(|| miner_payoff_honest(m.hashrate / total, market, m.cost_per_block)))
        .collect()
}

/// Order in which negative-payoff miners leave: costliest first, then
/// smaller hashrate, then id.
fn exit_order(a: &MinerSpec, b: &MinerSpec) -> Ordering {
    b.cost_per_block
        .total_cmp(&a.cost_per_block)
        .then(a.hashrate.total_cmp(&b.hashrate))
        .then(a.id.cmp(&b.id))
}

/// Survivors of iterated defection.
///
/// One miner leaves per round: of those with a negative payoff, the one with
/// the highest cost. Shares are recomputed over the survivors each round.
/// A miner with a non-negative payoff never turns negative later (its share
/// only grows), and the cheapest miner is always the last to leave, so the
/// result is non-empty whenever some miner could cover its cost alone.
///
/// ```
/// use powlab::economics::{equilibrium_miners, MarketState, MinerSpec};
/// let market = MarketState { price: 1.0, fees_per_block: 0.0, subsidy: 0.15, fee_variance: 0.0 };
/// let out = equilibrium_miners(&[MinerSpec::new("solo", 5_000.0, 0.008)], &market);
/// assert_eq!(out.len(), 1);
/// ```
pub fn equilibrium_miners(miners: &[MinerSpec], market: &MarketState) -> Vec<MinerSpec> {
    let mut alive = vec![true; miners.len()];
    loop {
        let pay = payoffs(miners, &alive, market);
        let leaver = (0..miners.len())
            .filter(|&i| matches!(pay[i], Some(p) if p < DEFECTION_PAYOFF))
            .min_by(|&a, &b| exit_order(&miners[a], &miners[b]));
        match leaver {
            Some(i) => alive[i] = false,
            None => break,
        }
    }
    miners.iter().zip(&alive).filter(|(_, a)| **a).map(|(m, _)| m.clone()).collect()
}

/// Survivors when every negative-payoff miner leaves at once each round.
///
/// Can over-shoot: miners that would be profitable once others leave may
/// exit in the same round.
pub fn synchronous_defection(miners: &[MinerSpec], market: &MarketState) -> Vec<MinerSpec> {
    let mut alive = vec![true; miners.len()];
    loop {
        let pay = payoffs(miners, &alive, market);
        let mut changed = false;
        for (i, p) in pay.iter().enumerate() {
            if matches!(p, Some(p) if *p < DEFECTION_PAYOFF) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    miners.iter().zip(&alive).filter(|(_, a)| **a).map(|(m, _)| m.clone()).collect()
}

/// Every survivor set reachable by removing negative-payoff miners one at a
/// time in any order. Each set is given as sorted ids.
pub fn reachable_outcomes(
    miners: &[MinerSpec],
    market: &MarketState,
) -> Result<BTreeSet<Vec<String>>, EconomicsError> {
    if miners.len() > 20 {
        return Err(EconomicsError::TooManyMiners(miners.len()));
    }
    fn visit(
        mask: u32,
        miners: &[MinerSpec],
        market: &MarketState,
        seen: &mut HashMap<u32, ()>,
        out: &mut BTreeSet<u32>,
    ) {
        if seen.insert(mask, ()).is_some() {
            return;
        }
        let alive: Vec<bool> = (0..miners.len()).map(|i| mask & (1 << i) != 0).collect();
        let pay = payoffs(miners, &alive, market);
        let negatives: Vec<usize> =
            (0..miners.len()).filter(|&i| matches!(pay[i], Some(p) if p < DEFECTION_PAYOFF)).collect();
        if negatives.is_empty() {
            out.insert(mask);
        }
        for i in negatives {
            visit(mask & !(1 << i), miners, market, seen, out);
        }
    }
    let mut seen = HashMap::new();
    let mut masks = BTreeSet::new();
    let full = if miners.is_empty() { 0 } else { (1u32 << miners.len()) - 1 };
    visit(full, miners, market, &mut seen, &mut masks);
    Ok(masks
        .into_iter()
        .map(|mask| {
            let mut ids: Vec<String> =
                (0..miners.len()).filter(|i| mask & (1 << i) != 0).map(|i| miners[i].id.clone()).collect();
            ids.sort();
            ids
        })
        .collect())
}

/// Cantelli bound on the chance that fees exceed the subsidy enough to
/// reward fee sniping: `sigma^2 / (sigma^2 + R_s^2)`.
pub fn fee_sniping_probability_bound(fee_variance: f64, subsidy: f64) -> Result<f64, EconomicsError> {
    if !(fee_variance >= 0.0) || !(subsidy > 0.0) {
        return Err(EconomicsError::Domain("need fee variance >= 0 and subsidy > 0".into()));
    }
    Ok(fee_variance / (fee_variance + subsidy * subsidy))
}

/// Fee variance at which the fee-sniping bound reaches `probability`.
pub fn fee_sniping_threshold(probability: f64, subsidy: f64) -> f64 {
    subsidy * subsidy * probability / (1.0 - probability)
}

/// Annual miner revenue in USD at `height`'s subsidy.
///
/// ```
/// use powlab::consensus::ChainParams;
/// use powlab::economics::security_budget;
/// let b = security_budget(&ChainParams::default(), 10_000, 1.0, 0.0);
/// assert_eq!(b, 6_574_500.0);
/// ```
pub fn security_budget(params: &ChainParams, height: u64, price: f64, annual_fees: f64) -> f64 {
    annual_subsidy(params, height).as_lat() * price + annual_fees
}

/// LAT paid out per year at `height`'s subsidy.
pub fn annual_subsidy(params: &ChainParams, height: u64) -> Amount {
    Amount(block_subsidy(params, height).shors() * BLOCKS_PER_YEAR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BotnetEstimate {
    /// H/s.
    pub total_hashrate: f64,
    pub equivalent_nodes: f64,
}

pub fn botnet_hashrate(n_bots: u64, per_bot: f64, node_hashrate: f64) -> Result<BotnetEstimate, EconomicsError> {
    if !(per_bot > 0.0) || !(node_hashrate > 0.0) {
        return Err(EconomicsError::Domain("hashrates must be positive".into()));
    }
    let total = n_bots as f64 * per_bot;
    Ok(BotnetEstimate { total_hashrate: total, equivalent_nodes: total / node_hashrate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market(subsidy: f64, price: f64) -> MarketState {
        MarketState { price, fees_per_block: 0.0, subsidy, fee_variance: 0.0 }
    }

    #[test]
    fn break_even_boundary_payoff() {
        let p = miner_payoff_honest(1.0, &market(0.15, 0.053), 0.008);
        assert!((p + 0.000_05).abs() < 1e-12);
        assert_eq!(miner_payoff_honest(0.0, &market(0.15, 1.0), 0.3), -0.3);
    }

    #[test]
    fn energy_rows() {
        let pm = PowerModel::default();
        let row = solo_mining(&pm, 240, 1_000, Amount::from_lat(50)).unwrap();
        assert!((row.energy_kwh - 6.666_667).abs() < 1e-6);
        assert!((row.cost_usd - 0.8).abs() < 1e-12);
        assert!((row.break_even_usd - 0.016).abs() < 1e-12);
        assert_eq!(marginal_cost_per_block(&pm, 0.0), 0.0);
        assert!(break_even_price(Amount::ZERO, 1.0).is_err());
    }

    #[test]
    fn synchronous_rule_over_shoots() {
        // ten equal miners each worth half the block alone: all negative at 1/10 share
        let miners: Vec<_> = (0..10).map(|i| MinerSpec::new(format!("m{i}"), 1.0, 0.5)).collect();
        let m = market(1.0, 1.0);
        assert!(synchronous_defection(&miners, &m).is_empty());
        assert_eq!(equilibrium_miners(&miners, &m).len(), 2);
    }

    #[test]
    fn order_dependent_outcomes_exist() {
        let miners = vec![
            MinerSpec::new("a", 1.0, 0.45),
            MinerSpec::new("b", 1.0, 0.45),
            MinerSpec::new("c", 1.0, 0.40),
        ];
        let outcomes = reachable_outcomes(&miners, &market(1.0, 1.0)).unwrap();
        assert_eq!(outcomes.len(), 3);
        let greedy = equilibrium_miners(&miners, &market(1.0, 1.0));
        let ids: Vec<_> = greedy.iter().map(|m| m.id.as_str()).collect();
        assert_eq!(ids, ["b", "c"]);
    }

    #[test]
    fn zero_reward_cascades() {
        let miners = vec![MinerSpec::new("a", 3.0, 0.01), MinerSpec::new("b", 1.0, 0.02)];
        assert!(equilibrium_miners(&miners, &market(0.0, 5.0)).is_empty());
    }

    #[test]
    fn fee_sniping() {
        assert_eq!(fee_sniping_probability_bound(0.0, 0.15).unwrap(), 0.0);
        let s2 = fee_sniping_threshold(0.1, 0.15);
        assert!((s2 - 0.0025).abs() < 1e-15);
        assert!((fee_sniping_probability_bound(s2, 0.15).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn budget_and_botnet() {
        let p = ChainParams::default();
        assert_eq!(security_budget(&p, 3_000_000, 10.0, 0.0), 197_235.0);
        assert_eq!(security_budget(&p, 3_000_000, 0.0, 42.0), 42.0);
        let b = botnet_hashrate(10_000, 2_000.0, DEFAULT_NODE_HASHRATE).unwrap();
        assert_eq!(b.total_hashrate, 20e6);
        assert!((b.equivalent_nodes - 3_000.0).abs() < 1.0);
    }
}
