//! Monte Carlo double-spend races.

use rand::RngCore;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::chain::stream_rng;
use super::SimError;

/// Hard cap on walk length beyond the starting deficit.
pub const WALK_CAP: u64 = 2_000;

/// Catch-up probability below which a walk counts as lost, relative to the
/// probability from its starting deficit.
pub const ABSORPTION_RELATIVE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaceEstimate {
    pub trials: u64,
    pub successes: u64,
}

impl RaceEstimate {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the frequency under success probability `p`.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Whether `p` lies within `sigmas` standard errors of the frequency.
    pub fn agrees_with(&self, p: f64, sigmas: f64) -> bool {
        let se = self.std_error(p).max(1.0 / self.trials as f64);
        (self.frequency() - p).abs() <= sigmas * se
    }
}

fn check(q: f64, trials: u64) -> Result<(), SimError> {
    if !(q > 0.0 && q < 0.5) {
        return Err(SimError::Config(format!("attacker share q = {q} must lie in (0, 0.5)")));
    }
    if trials == 0 {
        return Err(SimError::Config("at least one trial is required".into()));
    }
    Ok(())
}

/// Extra deficit at which a walk is abandoned.
fn absorption_margin(q: f64) -> u64 {
    let r = q / (1.0 - q);
    (ABSORPTION_RELATIVE.ln() / r.ln()).ceil() as u64
}

/// Random walk from `deficit` blocks behind; true if the attacker draws level.
fn catch_up(rng: &mut impl RngCore, deficit: u64, threshold: u64, lose_at: u64, max_steps: u64) -> bool {
    let mut d = deficit;
    for _ in 0..max_steps {
        if d == 0 {
            return true;
        }
        if d >= lose_at {
            return false;
        }
        if rng.next_u64() < threshold {
            d -= 1;
        } else {
            d += 1;
        }
    }
    d == 0
}

fn run_trials(
    trials: u64,
    seed: u64,
    trial: impl Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
) -> RaceEstimate {
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            trial(&mut rng) as u64
        })
        .sum();
    RaceEstimate { trials, successes }
}

fn step_threshold(q: f64) -> u64 {
    (q * 18_446_744_073_709_551_616.0) as u64
}

/// Attacker starts `k` blocks behind and mines at share `q`; each trial is a
/// catch-up walk on stream `trial index` of `seed`.
///
/// ```
/// use powlab::sim::simulate_double_spend_race;
/// let est = simulate_double_spend_race(0.3, 0, 10, 1).unwrap();
/// assert_eq!(est.frequency(), 1.0);
/// ```
pub fn simulate_double_spend_race(q: f64, k: u32, trials: u64, seed: u64) -> Result<RaceEstimate, SimError> {
    check(q, trials)?;
    let k = k as u64;
    let threshold = step_threshold(q);
    let lose_at = k + absorption_margin(q);
    Ok(run_trials(trials, seed, |rng| catch_up(rng, k, threshold, lose_at, k + WALK_CAP)))
}

/// Race where the attacker pre-mines while the merchant waits for `k`
/// confirmations: its lead is Poisson with mean `k q/(1-q)`, then the
/// catch-up walk runs from the remaining deficit.
pub fn simulate_double_spend_race_premined(
    q: f64,
    k: u32,
    trials: u64,
    seed: u64,
) -> Result<RaceEstimate, SimError> {
    check(q, trials)?;
    let k = k as u64;
    let threshold = step_threshold(q);
    let lambda = k as f64 * q / (1.0 - q);
    let margin = absorption_margin(q);
    let poisson = if k > 0 { Some(Poisson::new(lambda).map_err(|e| SimError::Config(e.to_string()))?) } else { None };
    Ok(run_trials(trials, seed, |rng| {
        let progress = match &poisson {
            Some(p) => p.sample(rng) as u64,
            None => 0,
        };
        if progress >= k {
            return true;
        }
        let deficit = k - progress;
        catch_up(rng, deficit, threshold, deficit + margin, deficit + WALK_CAP)
    }))
}
