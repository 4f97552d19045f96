//! Closed-form security and capacity calculators.
//!
//! Probabilities are plain `f64` in `[0, 1]`; turning them into percentages is
//! left to callers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emission::SECONDS_PER_YEAR;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecurityError {
    #[error("out of domain: {0}")]
    Domain(String),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, SecurityError> {
    Err(SecurityError::Domain(msg.into()))
}

/// An attacker with hashrate share `q` facing `k` confirmations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackerProfile {
    pub q: f64,
    pub k: u32,
}

impl AttackerProfile {
    pub fn new(q: f64, k: u32) -> Self {
        AttackerProfile { q, k }
    }

    /// `q / (1 - q)`, rejecting `q` outside `[0, 0.5)`.
    fn ratio(&self) -> Result<f64, SecurityError> {
        if !(0.0..0.5).contains(&self.q) {
            return domain(format!("attacker share q = {} must lie in [0, 0.5)", self.q));
        }
        Ok(self.q / (1.0 - self.q))
    }
}

/// Gambler's-ruin catch-up probability `min(1, (q/(1-q))^k)`.
///
/// ```
/// use powlab::security::{double_spend_bound, AttackerProfile};
/// let p = double_spend_bound(AttackerProfile::new(0.2, 3)).unwrap();
/// assert!((p - 0.015625).abs() < 1e-15);
/// assert!(double_spend_bound(AttackerProfile::new(0.5, 6)).is_err());
/// ```
pub fn double_spend_bound(a: AttackerProfile) -> Result<f64, SecurityError> {
    let r = a.ratio()?;
    Ok(r.powi(a.k as i32).min(1.0))
}

/// Success probability when the attacker's progress during the `k`
/// confirmations is Poisson with mean `k q / (1 - q)`.
///
/// Evaluated as `P(X >= k) + sum_{i<k} P(X = i) r^(k-i)`, which is the same
/// quantity without the cancellation in `1 - sum`. Poisson terms are carried
/// in log space.
pub fn double_spend_poisson(a: AttackerProfile) -> Result<f64, SecurityError> {
    let r = a.ratio()?;
    let k = a.k as u64;
    if k == 0 {
        return Ok(1.0);
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let lambda = k as f64 * r;
    let ln_lambda = lambda.ln();
    let ln_r = r.ln();
    let mut ln_pmf = -lambda;
    let mut below = 0.0;
    for i in 0..k {
        if i > 0 {
            ln_pmf += ln_lambda - (i as f64).ln();
        }
        below += (ln_pmf + (k - i) as f64 * ln_r).exp();
    }
    // upper tail P(X >= k); terms shrink geometrically once i > lambda
    let mut tail = 0.0;
    let mut ln_term = ln_pmf + ln_lambda - (k as f64).ln();
    let mut i = k;
    loop {
        let term = ln_term.exp();
        tail += term;
        if term <= tail * 1e-17 || i > k + 10_000 {
            break;
        }
        i += 1;
        ln_term += ln_lambda - (i as f64).ln();
    }
    Ok((tail + below).min(1.0))
}

/// Smallest `k` with `(q/(1-q))^k < p_target`; zero when `p_target >= 1`.
pub fn finality_confirmations(q: f64, p_target: f64) -> Result<u32, SecurityError> {
    if !(q > 0.0 && q < 0.5) {
        return domain(format!("q = {q} must lie in (0, 0.5)"));
    }
    if p_target.is_nan() || p_target <= 0.0 {
        return domain(format!("target probability {p_target} must be positive"));
    }
    if p_target >= 1.0 {
        return Ok(0);
    }
    let bound = |k: u32| double_spend_bound(AttackerProfile::new(q, k)).expect("q checked");
    let r = q / (1.0 - q);
    let mut k = (p_target.ln() / r.ln()).ceil().max(0.0) as u32;
    while bound(k) >= p_target {
        k += 1;
    }
    while k > 0 && bound(k - 1) < p_target {
        k -= 1;
    }
    Ok(k)
}

/// Block propagation parameters for the orphan model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkLink {
    /// Bytes.
    pub block_size: f64,
    /// Bytes per second.
    pub bandwidth: f64,
    /// Hops.
    pub diameter: f64,
    /// Seconds.
    pub block_time: f64,
}

/// `1 - exp(-s d / (B T))`.
pub fn orphan_probability(link: NetworkLink) -> Result<f64, SecurityError> {
    if !(link.bandwidth > 0.0 && link.diameter > 0.0 && link.block_time > 0.0 && link.block_size >= 0.0) {
        return domain("orphan model needs s >= 0 and positive B, d, T");
    }
    let x = link.block_size * link.diameter / (link.bandwidth * link.block_time);
    Ok(-(-x).exp_m1())
}

/// Inputs to the rented-hashrate attack cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Honest network hashrate, H/s.
    pub h_honest: f64,
    /// Hashrate per rented core, H/s.
    pub h_core: f64,
    /// USD per core-hour.
    pub c_cpu: f64,
    /// USD per 2 GB of memory.
    pub c_ram: f64,
    /// Attack duration in hours.
    pub hours: f64,
}

/// `(H_honest / H_core + 1) (c_cpu t + 2 c_ram)`.
pub fn attack_cost_51(m: CostModel) -> Result<f64, SecurityError> {
    if !(m.h_core > 0.0) || [m.h_honest, m.c_cpu, m.c_ram, m.hours].iter().any(|v| !(*v >= 0.0)) {
        return domain("cost model needs H_core > 0 and non-negative inputs");
    }
    Ok((m.h_honest / m.h_core + 1.0) * (m.c_cpu * m.hours + 2.0 * m.c_ram))
}

/// Lower bound on hashing time with `memory` bytes of a `dataset`-byte dataset:
/// `8 (dataset / memory) t_mem r`.
pub fn memory_time_bound(memory: f64, dataset: f64, t_mem: f64, iterations: f64) -> Result<f64, SecurityError> {
    if !(memory > 0.0) || !(memory <= dataset) {
        return domain(format!("memory {memory} must be in (0, {dataset}]"));
    }
    Ok(8.0 * dataset / memory * t_mem * iterations)
}

/// `(0.292 d, 0.265 d)`: log2 cost of classical and quantum lattice sieving.
pub fn lattice_attack_bits(dimension: u32) -> Result<(f64, f64), SecurityError> {
    if dimension == 0 {
        return domain("lattice dimension must be positive");
    }
    let d = dimension as f64;
    Ok((0.292 * d, 0.265 * d))
}

/// Whole transactions per block divided by block time.
pub fn tps_max(max_weight: u64, tx_weight: u64, block_time: f64) -> Result<f64, SecurityError> {
    if tx_weight == 0 || !(block_time > 0.0) {
        return domain("transaction weight and block time must be positive");
    }
    Ok((max_weight / tx_weight) as f64 / block_time)
}

/// Chain growth in bytes per year at utilization `u`.
pub fn storage_growth(utilization: f64, max_weight: u64, block_time: f64) -> Result<f64, SecurityError> {
    if !(0.0..=1.0).contains(&utilization) || !(block_time > 0.0) {
        return domain("utilization must be in [0, 1] and block time positive");
    }
    Ok(max_weight as f64 * utilization / block_time * SECONDS_PER_YEAR as f64)
}

/// Utilization implied by an average block of `bytes`.
pub fn utilization_for_block_size(bytes: f64, max_weight: u64) -> f64 {
    bytes / max_weight as f64
}

/// Seconds to verify `n_sigs` signatures during initial block download.
pub fn ibd_verify_time(n_sigs: f64, rate_per_core: f64, cores: u32) -> Result<f64, SecurityError> {
    if !(rate_per_core > 0.0) || cores == 0 || !(n_sigs >= 0.0) {
        return domain("rate must be positive and at least one core given");
    }
    Ok(n_sigs / (rate_per_core * cores as f64))
}

/// Block time right after losing a share `loss` of hashrate.
pub fn degraded_block_time(loss: f64, block_time: f64) -> Result<f64, SecurityError> {
    if !(0.0..1.0).contains(&loss) {
        return domain(format!("hashrate loss {loss} must lie in [0, 1)"));
    }
    Ok(block_time / (1.0 - loss))
}
