//! Acceptance criteria 1 to 10, one test each, checked as stated.
//!
//! Every test prints a single `PASS`/`FAIL` line straight to stderr so the
//! verdicts show up even when the harness captures output. Tests hold a
//! shared lock so their wall-clock timings do not overlap.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use powlab::consensus::{BlockRecord, ChainParams, Target256, COIN};
use powlab::difficulty::{lwma_next_target, lwma_trace, Branch};
use powlab::economics::{
    botnet_hashrate, equilibrium_miners, fee_sniping_threshold, miner_payoff_honest, reachable_outcomes,
    security_budget, solo_mining, MarketState, MinerSpec, PowerModel, DEFAULT_NODE_HASHRATE,
};
use powlab::emission::{block_subsidy, cumulative_supply, emission_schedule, inflation_rate, max_money_year};
use powlab::report::{reproduce, Provenance};
use powlab::security::{
    degraded_block_time, double_spend_bound, ibd_verify_time, lattice_attack_bits, storage_growth, tps_max,
    utilization_for_block_size, AttackerProfile,
};
use powlab::sim::{
    block_time_at_deviation, ensemble_stats, half_life_blocks, recovery_blocks, simulate_chain,
    simulate_double_spend_race, simulate_ensemble, deviation_envelope, HashrateEvent, ScenarioSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

#[derive(Default)]
struct Verdict {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn run_criterion(n: u32, title: &str, limit: Option<Duration>, body: impl FnOnce(&mut Verdict)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut v = Verdict::default();
    let start = Instant::now();
    body(&mut v);
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        v.check(elapsed < limit, format!("runtime {:.2} s over the {} s limit", elapsed.as_secs_f64(), limit.as_secs()));
    }
    let status = if v.failures.is_empty() { "PASS" } else { "FAIL" };
    let mut line = format!("criterion {n:>2} {status} [{:.2} s] {title}", elapsed.as_secs_f64());
    if !v.failures.is_empty() {
        line.push_str(&format!("; failed: {}", v.failures.join("; ")));
    }
    if !v.notes.is_empty() {
        line.push_str(&format!("; {}", v.notes.join("; ")));
    }
    line.push('\n');
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(v.failures.is_empty(), "criterion {n}: {}", v.failures.join("; "));
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn naive_subsidy(h: u64) -> u64 {
    if h < 5_670 {
        return 25 * COIN;
    }
    let r = (50 * COIN).checked_shr((h / 295_000) as u32).unwrap_or(0);
    r.max(15_000_000)
}

#[test]
fn criterion_01_emission_schedule() {
    run_criterion(1, "cumulative supply at phase ends", Some(Duration::from_secs(1)), |v| {
        let p = ChainParams::default();
        let targets = [(5_669u64, 141_750.0), (294_999, 14_608_250.0), (2_654_999, 29_300_633.0)];
        let mut naive = 0u64;
        let mut next = 0u64;
        for (h, printed) in targets {
            while next <= h {
                naive += naive_subsidy(next);
                next += 1;
            }
            let s = cumulative_supply(&p, h).unwrap();
            v.check(s.shors() == naive, format!("h={h}: closed form {} vs naive {naive}", s.shors()));
            v.check((s.as_lat() - printed).abs() <= 1.0, format!("h={h}: {} vs printed {printed}", s.as_lat()));
        }
    });
}

#[test]
fn criterion_02_subsidy_phases() {
    run_criterion(2, "rewards for all 11 phases", None, |v| {
        let p = ChainParams::default();
        let printed_shors = [
            2_500_000_000u64,
            5_000_000_000,
            2_500_000_000,
            1_250_000_000,
            625_000_000,
            312_500_000,
            156_250_000,
            78_125_000,
            39_062_500,
            19_531_250,
            15_000_000,
        ];
        let rows = emission_schedule(&p);
        v.check(rows.len() == 11, format!("{} phases", rows.len()));
        for (row, want) in rows.iter().zip(printed_shors) {
            let last = row.last_height.unwrap_or(row.first_height + 10_000_000);
            for h in [row.first_height, (row.first_height + last) / 2, last] {
                let got = block_subsidy(&p, h).shors();
                v.check(got == want, format!("{} at h={h}: {got} vs {want}", row.phase));
            }
        }
        for h in [2_655_000u64, 2_950_000, 10_000_000, u64::MAX] {
            v.check(block_subsidy(&p, h).shors() == 15_000_000, format!("tail lock at h={h}"));
        }
        v.check(block_subsidy(&p, 2_654_999).shors() == 19_531_250, "last halving block");
    });
}

#[test]
fn criterion_03_inflation() {
    run_criterion(3, "tail inflation and max_money year", None, |v| {
        let p = ChainParams::default();
        for (t, printed_pct) in [(0.0, 0.067), (53.0, 0.065), (153.0, 0.061), (353.0, 0.054)] {
            let pct = inflation_rate(&p, t) * 100.0;
            let d = rel(pct, printed_pct);
            v.check(d <= 0.001, format!("pi({t}) = {pct:.5}% is {:.2}% from printed {printed_pct}%", d * 100.0));
            let formula = 100.0 / (1486.0 + t);
            v.note(format!("pi({t}) {pct:.5}% vs 1/(1486+t) {formula:.5}%"));
        }
        let year = max_money_year(&p);
        v.check(year.abs_diff(644) <= 2, format!("max_money year {year}"));
    });
}

#[test]
fn criterion_04_lwma_analytics() {
    run_criterion(4, "LWMA convergence analytics", None, |v| {
        let hl = half_life_blocks(120);
        v.check((hl - 41.5).abs() <= 0.1, format!("half-life {hl:.3}"));
        let w = (119.0f64 / 121.0).powi(120);
        v.check((w - 0.135).abs() <= 0.001, format!("(119/121)^120 = {w:.5}"));
        let r = recovery_blocks(0.1, 0.07, 120);
        v.check(r.abs_diff(291) <= 1, format!("recovery {r}"));
        let ms = [0u64, 42, 120, 240, 360, 480];
        let dev = [9.0, 4.5, 1.21, 0.16, 0.022, 0.003];
        let time = [2_400.0, 1_320.0, 530.0, 278.0, 245.0, 241.0];
        for ((m, d), t) in ms.iter().zip(dev).zip(time) {
            let e = deviation_envelope(0.1, *m, 120);
            let bt = block_time_at_deviation(e, 240.0);
            v.check(rel(e, d) <= 0.02, format!("m={m} deviation {e:.4} is {:.2}% from {d}", rel(e, d) * 100.0));
            v.check(rel(bt, t) <= 0.02, format!("m={m} block time {bt:.1} is {:.2}% from {t}", rel(bt, t) * 100.0));
        }
    });
}

fn big(t: &Target256) -> BigUint {
    BigUint::from_bytes_be(&t.to_be_bytes())
}

/// Full-width LWMA with no evaluation-order branch.
fn lwma_oracle(p: &ChainParams, recs: &[BlockRecord]) -> BigUint {
    let n = p.lwma_window as i64;
    let t = p.spacing as i64;
    let k = n * (n + 1) * t / 2;
    let mut w = 0i64;
    let mut sum = BigUint::from(0u8);
    for (j, pair) in recs.windows(2).enumerate() {
        w += (pair[1].timestamp - pair[0].timestamp).clamp(-6 * t, 6 * t) * (j as i64 + 1);
        sum += big(&pair[1].target) / BigUint::from(n as u64);
    }
    let w = w.max(k / 10) as u64;
    (sum * w / BigUint::from(k as u64)).min(big(&p.pow_limit_target().unwrap()))
}

fn window(p: &ChainParams, next: u64, times: impl Fn(u64) -> i64, targets: impl Fn(u64) -> Target256) -> Vec<BlockRecord> {
    let n = p.lwma_window;
    let mut ts = 1_700_000_000i64;
    (0..=n)
        .map(|i| {
            if i > 0 {
                ts += times(i);
            }
            BlockRecord { height: next - n - 1 + i, timestamp: ts, target: targets(i) }
        })
        .collect()
}

#[test]
fn criterion_05_lwma_implementation() {
    run_criterion(5, "LWMA fixed point, spike cap, oracle equivalence", Some(Duration::from_secs(10)), |v| {
        let p = ChainParams::default();
        let next = 10_000u64;
        let n = p.lwma_window;
        let k = p.lwma_k(next);
        let limit = p.pow_limit_target().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);

        // constant spacing leaves the target unchanged up to the /N and /k truncation
        for _ in 0..200 {
            let bits = rng.random_range(20..=255u32);
            let tau = (Target256::from_limbs([rng.random(), rng.random(), rng.random(), rng.random()]) >> (256 - bits))
                .min(limit)
                .max(Target256::ONE);
            let recs = window(&p, next, |_| 240, |_| tau);
            let got = big(&lwma_next_target(&p, &recs, next).unwrap());
            let slack = BigUint::from(n + k);
            v.check(got <= big(&tau) && big(&tau) - &got <= slack, format!("fixed point at {tau}"));
        }

        // zero solve times floor the weighted sum at k/10: at most 10x harder
        for _ in 0..200 {
            let bits = rng.random_range(20..=250u32);
            let tau = Target256::MAX >> (256 - bits);
            let recs = window(&p, next, |_| 0, |_| tau);
            let got = big(&lwma_next_target(&p, &recs, next).unwrap());
            let tenth = big(&tau) / 10u32;
            let diff = if got > tenth { &got - &tenth } else { &tenth - &got };
            v.check(diff <= BigUint::from(n + k), format!("instamine burst at {tau}"));
            let times: Vec<i64> = (0..=n).map(|_| rng.random_range(-100_000..100_000)).collect();
            let wild = window(&p, next, |j| times[j as usize], |_| tau);
            let got = big(&lwma_next_target(&p, &wild, next).unwrap());
            v.check(got * 10u32 + BigUint::from(10 * (n + k)) >= big(&tau), format!("spike cap at {tau}"));
        }

        // 1,000 random windows across both branches and the cap
        let (mut divide, mut multiply, mut capped) = (0, 0, 0);
        for i in 0..1_000 {
            let regime = i % 4;
            let base = match regime {
                0 => Target256::MAX >> rng.random_range(70..200u32),
                1 | 2 => Target256::MAX >> rng.random_range(2..60u32),
                _ => limit.checked_sub(&(limit >> rng.random_range(1..40u32))).unwrap(),
            };
            let jitter: Vec<u64> = (0..=n).map(|_| rng.random_range(1..=4u64)).collect();
            let times: Vec<i64> = (0..=n).map(|_| rng.random_range(-3_000..6_000)).collect();
            let recs = window(&p, next, |j| times[j as usize], |j| base.checked_div_u64(jitter[j as usize]).unwrap());
            let trace = lwma_trace(&p, &recs, next).unwrap();
            let want = lwma_oracle(&p, &recs);
            let got = big(&trace.next_target);
            if trace.next_target == limit {
                capped += 1;
            }
            match trace.branch {
                Branch::MultiplyFirst => {
                    multiply += 1;
                    v.check(got == want, format!("window {i} multiply-first differs from oracle"));
                }
                Branch::DivideFirst => {
                    divide += 1;
                    let slack = BigUint::from(trace.weighted_solvetime_sum as u64);
                    v.check(got <= want && &want - &got <= slack, format!("window {i} divide-first off by more than W"));
                }
                Branch::Reset => v.check(false, format!("window {i} reset")),
            }
        }
        v.check(divide > 100 && multiply > 100 && capped > 10, format!("coverage {divide}/{multiply}/{capped}"));
        v.note(format!("{divide} divide-first, {multiply} multiply-first, {capped} capped"));
    });
}

#[test]
fn criterion_06_simulation_vs_bound() {
    run_criterion(6, "simulated convergence vs the deviation envelope", Some(Duration::from_secs(60)), |v| {
        let seeds = 100u64;
        for delta in [0.1, 0.5, 2.0, 10.0] {
            let spec = ScenarioSpec::constant(1e6, 400, 2_026)
                .with_burn_in(240)
                .with_event(HashrateEvent::Step { at: 0, multiplier: delta });
            let runs = simulate_ensemble(&spec, seeds).unwrap();
            let stats = ensemble_stats(&runs);
            for m in [120u64, 240, 360] {
                let measured = stats.mean_abs_deviation[m as usize];
                let envelope = deviation_envelope(delta, m, 120) * 1.25;
                v.check(
                    measured <= envelope,
                    format!("delta={delta} m={m}: mean |eps| {measured:.4} > {envelope:.4}"),
                );
            }
        }
        let eq = simulate_chain(&ScenarioSpec::constant(1e6, 100_000, 7)).unwrap();
        let mean = eq.summary.mean_block_time_s;
        v.check(rel(mean, 240.0) <= 0.01, format!("equilibrium mean block time {mean:.2} s"));
        v.note(format!("equilibrium mean block time {mean:.2} s"));
    });
}

#[test]
fn criterion_07_double_spend() {
    run_criterion(7, "double-spend bound, races, inconsistent rows", Some(Duration::from_secs(30)), |v| {
        let b = |q, k| double_spend_bound(AttackerProfile::new(q, k)).unwrap();
        let p1 = (b(0.1, 3) * 100.0 * 100.0).round() / 100.0;
        let p2 = (b(0.2, 3) * 100.0 * 100.0).round() / 100.0;
        v.check(p1 == 0.14, format!("q=0.1 k=3 rounds to {p1}%"));
        v.check(p2 == 1.56, format!("q=0.2 k=3 rounds to {p2}%"));
        let mut worst = 0.0f64;
        for q in [0.1, 0.2, 0.3, 0.4] {
            for k in [3u32, 6, 12] {
                let est = simulate_double_spend_race(q, k, 1_000_000, 88).unwrap();
                let p = b(q, k);
                let z = (est.frequency() - p).abs() / est.std_error(p).max(1e-6);
                worst = worst.max(z);
                v.check(est.agrees_with(p, 3.0), format!("race q={q} k={k}: {} vs {p}", est.frequency()));
            }
        }
        v.note(format!("largest race deviation {worst:.2} sigma"));
        let table = reproduce("double-spend", &ChainParams::default()).unwrap();
        let high: Vec<_> = table.rows.iter().filter(|r| r.label.starts_with("q=0.30") || r.label.starts_with("q=0.40") || r.label.starts_with("q=0.45")).collect();
        v.check(high.len() == 18, format!("{} rows for q >= 0.3", high.len()));
        for r in high {
            v.check(r.flag == Provenance::Inconsistent && !r.agrees, format!("{} not flagged inconsistent", r.label));
        }
    });
}

#[test]
fn criterion_08_capacity_economics() {
    run_criterion(8, "capacity and economics constants", None, |v| {
        let p = ChainParams::default();
        let tps = tps_max(56_000_000, 16_000, 240.0).unwrap();
        v.check((tps - 14.58).abs() <= 0.01, format!("TPS {tps:.4}"));
        let full = storage_growth(1.0, 56_000_000, 240.0).unwrap();
        v.check(rel(full, 7.4e12) <= 0.01, format!("full-block growth {full:.4e}"));
        let small = storage_growth(utilization_for_block_size(100_000.0, 56_000_000), 56_000_000, 240.0).unwrap();
        v.check((small / 1e9).round() == 13.0, format!("100 KB growth {small:.4e}"));
        let ibd = ibd_verify_time(32.9e6, 20_000.0, 1).unwrap();
        v.check((ibd - 1_645.0).abs() <= 1.0, format!("IBD {ibd:.1} s"));

        let heights = [10_000u64, 295_000, 590_000, 885_000, 1_180_000, 2_655_000];
        let printed = [
            [6.6e6, 65.7e6, 657.5e6],
            [3.3e6, 32.9e6, 328.7e6],
            [1.6e6, 16.4e6, 164.4e6],
            [822e3, 8.2e6, 82.2e6],
            [411e3, 4.1e6, 41.1e6],
            [19.7e3, 197.2e3, 1.97e6],
        ];
        for (h, row) in heights.iter().zip(printed) {
            for (price, want) in [1.0, 10.0, 100.0].into_iter().zip(row) {
                let got = security_budget(&p, *h, price, 0.0);
                v.check(rel(got, want) <= 0.005, format!("budget h={h} ${price}: {got:.0} is {:.2}% from {want}", rel(got, want) * 100.0));
            }
        }

        let pm = PowerModel::default();
        let rows = [
            (10u64, [0.028, 0.067, 0.008, 0.00016]),
            (100, [0.28, 0.67, 0.08, 0.0016]),
            (1_000, [2.78, 6.67, 0.80, 0.016]),
            (10_000, [27.8, 66.7, 8.00, 0.16]),
            (100_000, [278.0, 667.0, 80.04, 1.60]),
        ];
        for (n, want) in rows {
            let s = solo_mining(&pm, 240, n, block_subsidy(&p, p.warmup_blocks)).unwrap();
            let got = [s.expected_days, s.energy_kwh, s.cost_usd, s.break_even_usd];
            for (i, (g, w)) in got.iter().zip(want).enumerate() {
                v.check(rel(*g, w) <= 0.01, format!("N={n} column {i}: {g} vs {w}"));
            }
        }

        for (loss, want) in [(0.1, 267.0), (0.3, 343.0), (0.5, 480.0), (0.8, 1_200.0)] {
            let t = degraded_block_time(loss, 240.0).unwrap();
            v.check((t - want).abs() <= 1.0, format!("{loss} banned: {t:.1} s"));
        }
        for (bots, total) in [(10_000u64, 2e7), (100_000, 2e8), (1_000_000, 2e9), (5_000_000, 1e10)] {
            let est = botnet_hashrate(bots, 2_000.0, DEFAULT_NODE_HASHRATE).unwrap();
            v.check(est.total_hashrate == total, format!("{bots} bots: {}", est.total_hashrate));
        }
        let (classical, quantum) = lattice_attack_bits(1024).unwrap();
        v.check(classical.round() == 299.0 && quantum.round() == 271.0, format!("lattice {classical} {quantum}"));
        let r2 = 0.15f64 * 0.15;
        v.check((r2 - 0.0225).abs() < 1e-15, format!("R_s^2 {r2}"));
        let sigma2 = fee_sniping_threshold(0.1, 0.15);
        v.check((sigma2 - 0.0025).abs() < 1e-15, format!("sigma^2 {sigma2}"));
    });
}

fn population(rng: &mut ChaCha8Rng, n: usize) -> Vec<MinerSpec> {
    (0..n)
        .map(|i| MinerSpec::new(format!("m{i}"), rng.random_range(1.0..10_000.0), rng.random_range(0.001..0.2)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Survivors when negative miners always leave in the given priority order.
fn remove_in_order(miners: &[MinerSpec], order: &[usize], mk: &MarketState) -> Vec<String> {
    let mut alive = vec![true; miners.len()];
    loop {
        let total: f64 = miners.iter().zip(&alive).filter(|(_, a)| **a).map(|(m, _)| m.hashrate).sum();
        let leaver = order.iter().copied().find(|&i| {
            alive[i] && miner_payoff_honest(miners[i].hashrate / total, mk, miners[i].cost_per_block) < 0.0
        });
        match leaver {
            Some(i) => alive[i] = false,
            None => {
                let mut ids: Vec<String> =
                    miners.iter().zip(&alive).filter(|(_, a)| **a).map(|(m, _)| m.id.clone()).collect();
                ids.sort();
                return ids;
            }
        }
    }
}

#[test]
fn criterion_09_equilibrium() {
    run_criterion(9, "defection equilibrium properties", None, |v| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for case in 0..1_000 {
            let n = rng.random_range(1..50);
            let miners = population(&mut rng, n);
            let cheapest = miners.iter().map(|m| m.cost_per_block).fold(f64::INFINITY, f64::min);
            let price = cheapest / 0.15 * rng.random_range(1.0..4.0);
            let mk = MarketState { price, fees_per_block: 0.0, subsidy: 0.15, fee_variance: 0.0 };
            v.check(!equilibrium_miners(&miners, &mk).is_empty(), format!("population {case} emptied"));
        }
        for case in 0..100 {
            let n = rng.random_range(1..50);
            let miners = population(&mut rng, n);
            let mk = MarketState { price: rng.random_range(0.01..100.0), fees_per_block: 0.0, subsidy: 0.0, fee_variance: 0.0 };
            v.check(equilibrium_miners(&miners, &mk).is_empty(), format!("fee-only population {case} survived"));
        }

        let mut populations: Vec<(String, Vec<MinerSpec>, MarketState)> = (0..100)
            .map(|case| {
                let n = rng.random_range(2..=6);
                let miners = population(&mut rng, n);
                let cheapest = miners.iter().map(|m| m.cost_per_block).fold(f64::INFINITY, f64::min);
                let price = cheapest / 0.15 * rng.random_range(1.0..3.0);
                (format!("random {case}"), miners, MarketState { price, fees_per_block: 0.0, subsidy: 0.15, fee_variance: 0.0 })
            })
            .collect();
        populations.push((
            "a(1,.45) b(1,.45) c(1,.40)".into(),
            vec![MinerSpec::new("a", 1.0, 0.45), MinerSpec::new("b", 1.0, 0.45), MinerSpec::new("c", 1.0, 0.40)],
            MarketState { price: 1.0, fees_per_block: 0.0, subsidy: 1.0, fee_variance: 0.0 },
        ));
        let mut varying = 0;
        let mut most = 0;
        let mut disagree = 0;
        for (_, miners, mk) in &populations {
            let outcomes: BTreeSet<Vec<String>> =
                permutations(miners.len()).iter().map(|o| remove_in_order(miners, o, mk)).collect();
            if reachable_outcomes(miners, mk).unwrap() != outcomes {
                disagree += 1;
            }
            if outcomes.len() > 1 {
                varying += 1;
                most = most.max(outcomes.len());
            }
        }
        v.check(disagree == 0, format!("{disagree} populations where search and permutation oracle disagree"));
        v.check(
            varying == 0,
            format!("{varying} of {} populations reach different survivor sets under different removal orders (up to {most})", populations.len()),
        );
    });
}

fn run_scenario(dir: &std::path::Path, name: &str, threads: usize) -> Vec<u8> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_powlab"))
        .args(["scenario", "run"])
        .arg(dir.join("scenario.toml"))
        .args(["--seed", "42", "--runs", "4", "--threads", &threads.to_string(), "--out"])
        .arg(&out)
        .output()
        .expect("run powlab");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_10_determinism() {
    run_criterion(10, "byte-identical scenario output", None, |v| {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("scenario.toml"),
            "base_hashrate = 1.0e6\nhorizon = 2000\nseed = 1\nburn_in = 240\n\n[[events]]\nkind = \"step\"\nat = 500\nmultiplier = 0.1\n",
        )
        .unwrap();
        let a = run_scenario(dir.path(), "a.csv", 1);
        let b = run_scenario(dir.path(), "b.csv", 1);
        let c = run_scenario(dir.path(), "c.csv", 4);
        v.check(!a.is_empty(), "empty output");
        v.check(a == b, "two runs differ");
        v.check(a == c, "1 thread and 4 threads differ");
    });
}
