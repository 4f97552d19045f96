use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "powlab", version, about = "Emission, difficulty, security and economics calculators for an LWMA-1 chain")]
pub struct Cli {
    /// Chain parameter file (TOML); built-in defaults when absent.
    #[arg(long, global = true, env = "POWLAB_CONFIG", value_name = "FILE")]
    pub params: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Block subsidy at a height.
    Subsidy { height: u64 },
    /// Cumulative supply through a height.
    Supply { height: u64 },
    /// Emission timeline by phase.
    Schedule,
    #[command(subcommand)]
    Difficulty(DifficultyCmd),
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Orphan probability for a block propagation model.
    Orphan(OrphanArgs),
    /// Chain growth and throughput at a utilization.
    Storage(StorageArgs),
    /// Annual security budget.
    Budget(BudgetArgs),
    #[command(subcommand)]
    Econ(EconCmd),
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    #[command(subcommand)]
    Tables(TablesCmd),
}

#[derive(Debug, Subcommand)]
pub enum DifficultyCmd {
    /// Next LWMA-1 target after a window of blocks.
    Next {
        /// CSV with columns height, timestamp and either target (hex) or bits.
        #[arg(long, value_name = "FILE")]
        window: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AttackCmd {
    /// Catch-up probability after k confirmations.
    DoubleSpend {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: u32,
        /// Also run this many simulated races.
        #[arg(long, value_name = "TRIALS")]
        monte_carlo: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Confirmations needed to push the catch-up bound below p.
    Finality {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
    },
    /// Cost of renting enough cores to out-mine the network.
    Cost51 {
        /// Honest network hashrate, H/s.
        #[arg(long)]
        hashrate: f64,
        /// Hashrate per rented core, H/s.
        #[arg(long, default_value_t = 100.0)]
        core_hashrate: f64,
        /// USD per core-hour.
        #[arg(long, default_value_t = 0.02)]
        cpu_cost: f64,
        /// USD per 2 GB of memory.
        #[arg(long, default_value_t = 0.01)]
        ram_cost: f64,
        #[arg(long, default_value_t = 1.0)]
        hours: f64,
    },
}

#[derive(Debug, Args)]
pub struct OrphanArgs {
    /// Bytes.
    #[arg(long)]
    pub block_size: f64,
    /// Bytes per second.
    #[arg(long)]
    pub bandwidth: f64,
    /// Hops.
    #[arg(long, default_value_t = 6.0)]
    pub diameter: f64,
    /// Seconds; the post-warm-up spacing when absent.
    #[arg(long)]
    pub block_time: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StorageArgs {
    /// Fraction of the maximum block weight in use.
    #[arg(long)]
    pub utilization: f64,
    /// Height whose weight limit applies.
    #[arg(long, default_value_t = 100_000)]
    pub height: u64,
    /// Weight of one transaction, for the throughput figure.
    #[arg(long, default_value_t = 3_200)]
    pub tx_weight: u64,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub height: u64,
    /// USD per LAT.
    #[arg(long)]
    pub price: f64,
    /// USD of fees per year.
    #[arg(long, default_value_t = 0.0)]
    pub annual_fees: f64,
}

#[derive(Debug, Subcommand)]
pub enum EconCmd {
    /// Energy and cost of solo mining one block.
    Energy {
        /// Nodes sharing the hashrate.
        #[arg(long)]
        network_size: u64,
        #[arg(long, default_value_t = 100.0)]
        watts: f64,
        #[arg(long, default_value_t = 0.12)]
        usd_per_kwh: f64,
        /// Height whose subsidy and spacing apply.
        #[arg(long, default_value_t = 2_655_000)]
        height: u64,
    },
    /// LAT price at which one block covers a cost.
    BreakEven {
        /// USD per block.
        #[arg(long)]
        cost: f64,
        #[arg(long, default_value_t = 2_655_000)]
        height: u64,
    },
    /// Survivors of iterated miner defection.
    Equilibrium {
        /// CSV with columns id, hashrate, cost_per_block.
        #[arg(long, value_name = "FILE")]
        miners: PathBuf,
        #[arg(long)]
        price: f64,
        /// LAT per block.
        #[arg(long, default_value_t = 0.15)]
        subsidy: f64,
        /// LAT per block.
        #[arg(long, default_value_t = 0.0)]
        fees: f64,
        #[arg(long, value_enum, default_value_t = Rule::Greedy)]
        rule: Rule,
    },
    /// Cantelli bound on fee sniping.
    FeeSniping {
        /// LAT squared.
        #[arg(long)]
        variance: f64,
        /// LAT per block.
        #[arg(long, default_value_t = 0.15)]
        subsidy: f64,
    },
    /// Aggregate hashrate of a botnet.
    Botnet {
        #[arg(long)]
        bots: u64,
        /// H/s per bot.
        #[arg(long)]
        per_bot: f64,
        /// H/s of one honest node.
        #[arg(long, default_value_t = powlab::economics::DEFAULT_NODE_HASHRATE)]
        node_hashrate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// Costliest negative miner leaves first, one per round.
    Greedy,
    /// Every negative miner leaves each round.
    Synchronous,
    /// Every outcome reachable by some removal order.
    All,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Simulate a scenario file and write its trajectory CSV.
    Run {
        file: PathBuf,
        /// Overrides the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Independent runs; more than one adds a leading run column.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Worker threads; all cores when absent.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TablesCmd {
    /// Rebuild tables and compare them with their printed values.
    Reproduce {
        /// Table id, or its numeric key as listed in `--help`.
        #[arg(long, value_parser = parse_table)]
        section: Option<&'static str>,
    },
    /// Every table, inconsistent rows included.
    Deltas,
}

/// Numeric keys accepted for the published tables, mapped to table ids.
const TABLE_KEYS: &[(&str, &str)] = &[
    ("4.3", "emission"),
    ("8.1", "budget"),
    ("8.8.2", "double-spend"),
    ("8.8.3", "recovery"),
    ("9.4.1", "solo-mining"),
    ("scenario7", "cloud-ban"),
];

fn parse_table(s: &str) -> Result<&'static str, String> {
    let by_key = TABLE_KEYS.iter().find(|(k, _)| *k == s).map(|(_, id)| *id);
    by_key.or_else(|| powlab::report::TABLE_IDS.iter().find(|id| **id == s).copied()).ok_or_else(|| {
        let keys: Vec<String> = TABLE_KEYS.iter().map(|(k, id)| format!("{id} ({k})")).collect();
        format!("expected one of {}", keys.join(", "))
    })
}
