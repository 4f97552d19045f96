use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use powlab::consensus::{
    compress_compact, max_block_weight, target_spacing, BlockRecord, ChainParams, CompactBits, Target256,
};
use powlab::difficulty::{lwma_trace, Branch};
use powlab::economics::{
    botnet_hashrate, break_even_price, equilibrium_miners, fee_sniping_probability_bound, reachable_outcomes,
    security_budget, solo_mining, synchronous_defection, MarketState, MinerSpec, PowerModel,
};
use powlab::emission::{block_subsidy, cumulative_supply, emission_schedule, schedule_csv, schedule_markdown};
use powlab::report::{self, format_value, TableReport};
use powlab::security::{
    attack_cost_51, double_spend_bound, double_spend_poisson, finality_confirmations, orphan_probability,
    storage_growth, tps_max, AttackerProfile, CostModel, NetworkLink,
};
use powlab::sim::{simulate_double_spend_race, simulate_ensemble, ScenarioSpec, Trajectory};
use serde::{Deserialize, Serialize};

use crate::args::{
    AttackCmd, BudgetArgs, Cli, Command, DifficultyCmd, EconCmd, Format, OrphanArgs, Rule, ScenarioCmd,
    StorageArgs, TablesCmd,
};
use crate::output::render;

pub struct Outcome {
    pub text: String,
    /// False when a reproduced table misses its tolerance.
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

fn load_params(cli: &Cli) -> Result<ChainParams> {
    match &cli.params {
        Some(path) => Ok(ChainParams::load(path)?),
        None => Ok(ChainParams::default()),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let params = load_params(cli)?;
    let f = cli.format;
    match &cli.command {
        Command::Subsidy { height } => {
            let amount = block_subsidy(&params, *height);
            let v = AmountAt { height: *height, shors: amount.shors(), lat: amount.to_string() };
            Ok(Outcome::ok(render(f, &v, Some(format!("{amount}\n")))?))
        }
        Command::Supply { height } => {
            let amount = cumulative_supply(&params, *height)?;
            let v = AmountAt { height: *height, shors: amount.shors(), lat: amount.to_string() };
            Ok(Outcome::ok(render(f, &v, Some(format!("{amount}\n")))?))
        }
        Command::Schedule => {
            let rows = emission_schedule(&params);
            let text = match f {
                Format::Human => schedule_markdown(&rows),
                Format::Csv => schedule_csv(&rows),
                Format::Json => render(f, &rows, None)?,
            };
            Ok(Outcome::ok(text))
        }
        Command::Difficulty(DifficultyCmd::Next { window }) => difficulty_next(f, &params, window),
        Command::Attack(cmd) => attack(f, cmd),
        Command::Orphan(a) => orphan(f, &params, a),
        Command::Storage(a) => storage(f, &params, a),
        Command::Budget(a) => budget(f, &params, a),
        Command::Econ(cmd) => econ(f, &params, cmd),
        Command::Scenario(ScenarioCmd::Run { file, seed, out, runs, threads }) => {
            let mut spec = ScenarioSpec::load(file)?;
            if cli.params.is_some() {
                spec.params = params;
            }
            if let Some(s) = seed {
                spec.seed = *s;
            }
            scenario_run(f, &spec, out, *runs, *threads)
        }
        Command::Tables(TablesCmd::Reproduce { section }) => {
            let ids: Vec<&str> = match section {
                Some(id) => vec![*id],
                None => report::TABLE_IDS.to_vec(),
            };
            let reports = ids.iter().map(|id| report::reproduce(id, &params)).collect::<Result<Vec<_>, _>>()?;
            let ok = reports.iter().all(TableReport::all_within_tolerance);
            Ok(Outcome { text: tables_text(f, &reports)?, ok })
        }
        Command::Tables(TablesCmd::Deltas) => {
            let reports = report::deltas(&params)?;
            Ok(Outcome::ok(tables_text(f, &reports)?))
        }
    }
}

#[derive(Serialize)]
struct AmountAt {
    height: u64,
    shors: u64,
    lat: String,
}

fn tables_text(f: Format, reports: &[TableReport]) -> Result<String> {
    Ok(match f {
        Format::Human => report::render_human(reports),
        Format::Csv => report::to_csv(reports)?,
        Format::Json => render(f, &reports, None)?,
    })
}

#[derive(Deserialize)]
struct WindowRow {
    height: u64,
    timestamp: i64,
    #[serde(default)]
    target: Option<String>,
    #[serde(default)]
    bits: Option<String>,
}

fn parse_bits(s: &str) -> Result<CompactBits> {
    let s = s.trim();
    let bits = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .with_context(|| format!("bad compact bits {s:?}"))?;
    Ok(CompactBits(bits))
}

fn read_window(path: &Path) -> Result<Vec<BlockRecord>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<WindowRow>().enumerate() {
        let row = row.with_context(|| format!("{} record {}", path.display(), i + 1))?;
        let target = match (&row.target, &row.bits) {
            (Some(t), _) if !t.trim().is_empty() => t.trim().parse::<Target256>()?,
            (_, Some(b)) if !b.trim().is_empty() => parse_bits(b)?.expand()?,
            _ => bail!("{} record {}: needs a target or bits column", path.display(), i + 1),
        };
        out.push(BlockRecord { height: row.height, timestamp: row.timestamp, target });
    }
    Ok(out)
}

#[derive(Serialize)]
struct NextTarget {
    height: u64,
    target: String,
    bits: String,
    branch: &'static str,
    weighted_solvetime_sum: i64,
}

fn difficulty_next(f: Format, params: &ChainParams, window: &Path) -> Result<Outcome> {
    let records = read_window(window)?;
    let Some(last) = records.last() else { bail!("{} has no blocks", window.display()) };
    let height = last.height + 1;
    let trace = lwma_trace(params, &records, height)?;
    let v = NextTarget {
        height,
        target: trace.next_target.to_hex(),
        bits: compress_compact(&trace.next_target).to_string(),
        branch: match trace.branch {
            Branch::Reset => "reset",
            Branch::DivideFirst => "divide-first",
            Branch::MultiplyFirst => "multiply-first",
        },
        weighted_solvetime_sum: trace.weighted_solvetime_sum,
    };
    Ok(Outcome::ok(render(f, &v, None)?))
}

#[derive(Serialize)]
struct DoubleSpend {
    q: f64,
    k: u32,
    catch_up_bound: f64,
    poisson_model: f64,
    monte_carlo_trials: Option<u64>,
    monte_carlo_frequency: Option<f64>,
    monte_carlo_std_error: Option<f64>,
}

fn attack(f: Format, cmd: &AttackCmd) -> Result<Outcome> {
    let text = match *cmd {
        AttackCmd::DoubleSpend { q, k, monte_carlo, seed } => {
            let a = AttackerProfile::new(q, k);
            let bound = double_spend_bound(a)?;
            let mc = monte_carlo.map(|n| simulate_double_spend_race(q, k, n, seed)).transpose()?;
            let v = DoubleSpend {
                q,
                k,
                catch_up_bound: bound,
                poisson_model: double_spend_poisson(a)?,
                monte_carlo_trials: mc.map(|e| e.trials),
                monte_carlo_frequency: mc.map(|e| e.frequency()),
                monte_carlo_std_error: mc.map(|e| e.std_error(bound)),
            };
            render(f, &v, None)?
        }
        AttackCmd::Finality { q, p } => {
            #[derive(Serialize)]
            struct Finality {
                q: f64,
                p: f64,
                confirmations: u32,
            }
            render(f, &Finality { q, p, confirmations: finality_confirmations(q, p)? }, None)?
        }
        AttackCmd::Cost51 { hashrate, core_hashrate, cpu_cost, ram_cost, hours } => {
            let model = CostModel { h_honest: hashrate, h_core: core_hashrate, c_cpu: cpu_cost, c_ram: ram_cost, hours };
            #[derive(Serialize)]
            struct Cost {
                #[serde(flatten)]
                model: CostModel,
                cost_usd: f64,
            }
            render(f, &Cost { model, cost_usd: attack_cost_51(model)? }, None)?
        }
    };
    Ok(Outcome::ok(text))
}

fn orphan(f: Format, params: &ChainParams, a: &OrphanArgs) -> Result<Outcome> {
    let link = NetworkLink {
        block_size: a.block_size,
        bandwidth: a.bandwidth,
        diameter: a.diameter,
        block_time: a.block_time.unwrap_or(params.spacing as f64),
    };
    #[derive(Serialize)]
    struct Orphan {
        #[serde(flatten)]
        link: NetworkLink,
        orphan_probability: f64,
    }
    Ok(Outcome::ok(render(f, &Orphan { link, orphan_probability: orphan_probability(link)? }, None)?))
}

fn storage(f: Format, params: &ChainParams, a: &StorageArgs) -> Result<Outcome> {
    let weight = max_block_weight(params, a.height);
    let spacing = target_spacing(params, a.height) as f64;
    #[derive(Serialize)]
    struct Storage {
        height: u64,
        max_block_weight: u64,
        utilization: f64,
        bytes_per_year: f64,
        tx_weight: u64,
        tps_max: f64,
    }
    let v = Storage {
        height: a.height,
        max_block_weight: weight,
        utilization: a.utilization,
        bytes_per_year: storage_growth(a.utilization, weight, spacing)?,
        tx_weight: a.tx_weight,
        tps_max: tps_max(weight, a.tx_weight, spacing)?,
    };
    Ok(Outcome::ok(render(f, &v, None)?))
}

fn budget(f: Format, params: &ChainParams, a: &BudgetArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Budget {
        height: u64,
        price_usd: f64,
        annual_fees_usd: f64,
        annual_budget_usd: f64,
    }
    let v = Budget {
        height: a.height,
        price_usd: a.price,
        annual_fees_usd: a.annual_fees,
        annual_budget_usd: security_budget(params, a.height, a.price, a.annual_fees),
    };
    Ok(Outcome::ok(render(f, &v, None)?))
}

fn read_miners(path: &Path) -> Result<Vec<MinerSpec>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{} record {}", path.display(), i + 1)))
        .collect()
}

fn econ(f: Format, params: &ChainParams, cmd: &EconCmd) -> Result<Outcome> {
    let text = match cmd {
        EconCmd::Energy { network_size, watts, usd_per_kwh, height } => {
            let pm = PowerModel { node_watts: *watts, usd_per_kwh: *usd_per_kwh };
            let solo = solo_mining(
                &pm,
                target_spacing(params, *height),
                *network_size,
                block_subsidy(params, *height),
            )?;
            render(f, &solo, None)?
        }
        EconCmd::BreakEven { cost, height } => {
            #[derive(Serialize)]
            struct BreakEven {
                height: u64,
                cost_usd: f64,
                break_even_usd: f64,
            }
            let price = break_even_price(block_subsidy(params, *height), *cost)?;
            render(f, &BreakEven { height: *height, cost_usd: *cost, break_even_usd: price }, None)?
        }
        EconCmd::Equilibrium { miners, price, subsidy, fees, rule } => {
            let miners = read_miners(miners)?;
            let market = MarketState { price: *price, fees_per_block: *fees, subsidy: *subsidy, fee_variance: 0.0 };
            #[derive(Serialize)]
            struct Outcome {
                survivors: Vec<String>,
            }
            let ids = |v: Vec<MinerSpec>| v.into_iter().map(|m| m.id).collect::<Vec<_>>();
            let outcomes: Vec<Outcome> = match rule {
                Rule::Greedy => vec![Outcome { survivors: ids(equilibrium_miners(&miners, &market)) }],
                Rule::Synchronous => vec![Outcome { survivors: ids(synchronous_defection(&miners, &market)) }],
                Rule::All => reachable_outcomes(&miners, &market)?
                    .into_iter()
                    .map(|survivors| Outcome { survivors })
                    .collect(),
            };
            let human = outcomes
                .iter()
                .map(|o| if o.survivors.is_empty() { "(none)".to_string() } else { o.survivors.join(" ") } + "\n")
                .collect();
            match f {
                Format::Csv => {
                    let flat: Vec<_> = outcomes
                        .iter()
                        .enumerate()
                        .map(|(i, o)| Flat { outcome: i, survivors: o.survivors.join(" ") })
                        .collect();
                    render(f, &flat, None)?
                }
                _ => render(f, &outcomes, Some(human))?,
            }
        }
        EconCmd::FeeSniping { variance, subsidy } => {
            #[derive(Serialize)]
            struct Sniping {
                fee_variance: f64,
                subsidy: f64,
                probability_bound: f64,
            }
            let p = fee_sniping_probability_bound(*variance, *subsidy)?;
            render(f, &Sniping { fee_variance: *variance, subsidy: *subsidy, probability_bound: p }, None)?
        }
        EconCmd::Botnet { bots, per_bot, node_hashrate } => {
            render(f, &botnet_hashrate(*bots, *per_bot, *node_hashrate)?, None)?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct Flat {
    outcome: usize,
    survivors: String,
}

#[derive(Serialize)]
struct RunSummary {
    run: u64,
    blocks: usize,
    mean_block_time_s: f64,
    mean_expected_time_s: f64,
    half_life_blocks: Option<u64>,
    recovery_blocks: Option<u64>,
}

fn trajectories_csv(runs: &[Trajectory]) -> String {
    if let [only] = runs {
        return only.to_csv();
    }
    let mut out = String::new();
    for (r, t) in runs.iter().enumerate() {
        let csv = t.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if r == 0 {
            out.push_str(&format!("run,{header}\n"));
        }
        for line in lines {
            out.push_str(&format!("{r},{line}\n"));
        }
    }
    out
}

fn scenario_run(f: Format, spec: &ScenarioSpec, out: &Path, runs: u64, threads: Option<usize>) -> Result<Outcome> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let trajectories = pool.install(|| simulate_ensemble(spec, runs))?;
    fs::write(out, trajectories_csv(&trajectories)).with_context(|| format!("writing {}", out.display()))?;
    let summaries: Vec<RunSummary> = trajectories
        .iter()
        .enumerate()
        .map(|(r, t)| RunSummary {
            run: r as u64,
            blocks: t.blocks.len(),
            mean_block_time_s: t.summary.mean_block_time_s,
            mean_expected_time_s: t.summary.mean_expected_time_s,
            half_life_blocks: t.summary.half_life_blocks,
            recovery_blocks: t.summary.recovery_blocks,
        })
        .collect();
    let human = summaries
        .iter()
        .map(|s| {
            format!(
                "run {}: {} blocks, mean block time {} s, half-life {}, recovery {}\n",
                s.run,
                s.blocks,
                format_value(s.mean_block_time_s),
                s.half_life_blocks.map_or("-".into(), |v| v.to_string()),
                s.recovery_blocks.map_or("-".into(), |v| v.to_string()),
            )
        })
        .collect::<String>()
        + &format!("wrote {}\n", out.display());
    Ok(Outcome::ok(render(f, &summaries, Some(human))?))
}
