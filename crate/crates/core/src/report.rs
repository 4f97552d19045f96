//! Reproduction of published tables and the delta report.
//!
//! Each row pairs a printed value with the value the library computes and a
//! declared provenance flag. A printed value counts as reproduced when the
//! relative (or absolute) difference is within tolerance, or when the
//! computed value rounds to the printed digits: a number printed as `0.16`
//! cannot be checked more finely than its last digit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::{max_block_weight, ChainParams};
use crate::economics::{
    botnet_hashrate, break_even_price, fee_sniping_threshold, security_budget, solo_mining, PowerModel,
    DEFAULT_NODE_HASHRATE,
};
use crate::emission::{
    annual_tail_emission, block_subsidy, cumulative_supply, emission_schedule, height_to_time, inflation_rate,
    max_money_year, BLOCKS_PER_YEAR, SECONDS_PER_YEAR,
};
use crate::security::{
    attack_cost_51, degraded_block_time, double_spend_bound, double_spend_poisson, finality_confirmations,
    ibd_verify_time, lattice_attack_bits, orphan_probability, storage_growth, tps_max, AttackerProfile, CostModel,
    NetworkLink,
};
use crate::sim::{block_time_at_deviation, decay_factor, half_life_blocks, recovery_blocks, deviation_envelope, oscillation_avg_bound};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown table id {0:?}; known ids: {known}", known = ALL_TABLE_IDS.join(", "))]
    UnknownTable(String),
    #[error("table computation failed: {0}")]
    Compute(String),
    #[error("malformed table CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Tables reproducible one at a time.
pub const TABLE_IDS: &[&str] = &["emission", "budget", "double-spend", "recovery", "solo-mining", "cloud-ban"];

/// Every table in the delta report.
pub const ALL_TABLE_IDS: &[&str] =
    &["emission", "budget", "double-spend", "recovery", "solo-mining", "cloud-ban", "botnet", "orphan", "storage", "attack-cost", "constants"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Printed value follows from the stated formula.
    MatchesFormula,
    /// Printed value disagrees with the stated formula.
    #[serde(rename = "paper-inconsistent")]
    Inconsistent,
    /// No printed value to compare; the computed value is reported alone.
    DerivedOnly,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::MatchesFormula => "matches-formula",
            Provenance::Inconsistent => "paper-inconsistent",
            Provenance::DerivedOnly => "derived-only",
        }
    }
}

/// How a printed value constrains the computed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// An approximate number.
    Approx,
    /// An upper bound such as `< 10^-9`.
    Below,
    /// Nothing numeric to compare against.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub table: String,
    pub label: String,
    /// As printed, units included.
    pub published: String,
    pub reference: ReferenceKind,
    /// Printed number in the units of `computed`.
    pub reference_value: Option<f64>,
    /// Place value of the last printed digit.
    pub resolution: Option<f64>,
    pub computed: f64,
    pub rel_delta: Option<f64>,
    pub rel_tolerance: Option<f64>,
    pub abs_tolerance: Option<f64>,
    pub flag: Provenance,
    pub agrees: bool,
}

impl Row {
    fn evaluate(&mut self) {
        self.rel_delta = self.reference_value.map(|r| {
            if r == 0.0 {
                self.computed.abs()
            } else {
                (self.computed - r).abs() / r.abs()
            }
        });
        self.agrees = match (self.reference, self.reference_value) {
            (ReferenceKind::Approx, Some(r)) => {
                let diff = (self.computed - r).abs();
                self.rel_delta.zip(self.rel_tolerance).is_some_and(|(d, t)| d <= t)
                    || self.abs_tolerance.is_some_and(|t| diff <= t)
                    || self.resolution.is_some_and(|res| diff <= res / 2.0 * (1.0 + 1e-9))
            }
            (ReferenceKind::Below, Some(r)) => self.computed < r,
            _ => false,
        };
    }

    /// A matches-formula row outside tolerance, or an inconsistent row that
    /// unexpectedly agrees.
    pub fn is_misclassified(&self) -> bool {
        match self.flag {
            Provenance::MatchesFormula => !self.agrees,
            Provenance::Inconsistent => self.agrees,
            Provenance::DerivedOnly => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub id: String,
    pub title: String,
    pub rows: Vec<Row>,
}

impl TableReport {
    /// True when every matches-formula row agrees with its printed value.
    pub fn all_within_tolerance(&self) -> bool {
        self.rows.iter().filter(|r| r.flag == Provenance::MatchesFormula).all(|r| r.agrees)
    }

    pub fn rows_flagged(&self, flag: Provenance) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.flag == flag)
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// A number as printed: its value and the place value of its last digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Printed {
    pub value: f64,
    pub resolution: f64,
}

/// Parses printed digits such as `"14,608,250"` or `"0.016"`, scaled by `scale`.
pub fn printed(digits: &str, scale: f64) -> Printed {
    let clean: String = digits.chars().filter(|c| *c != ',').collect();
    let decimals = clean.split_once('.').map(|(_, f)| f.len() as i32).unwrap_or(0);
    Printed {
        value: clean.parse::<f64>().expect("printed digits") * scale,
        resolution: 10f64.powi(-decimals) * scale,
    }
}

enum Tol {
    Rel(f64),
    Abs(f64),
}

struct Builder {
    table: String,
    rows: Vec<Row>,
}

impl Builder {
    fn new(table: &str) -> Self {
        Builder { table: table.to_string(), rows: Vec::new() }
    }

    fn push(&mut self, mut row: Row) {
        row.evaluate();
        self.rows.push(row);
    }

    fn approx(&mut self, label: impl Into<String>, published: &str, p: Printed, computed: f64, tol: Tol, flag: Provenance) {
        let (rel, abs) = match tol {
            Tol::Rel(t) => (Some(t), None),
            Tol::Abs(t) => (None, Some(t)),
        };
        self.push(Row {
            table: self.table.clone(),
            label: label.into(),
            published: published.to_string(),
            reference: ReferenceKind::Approx,
            reference_value: Some(p.value),
            resolution: Some(p.resolution),
            computed,
            rel_delta: None,
            rel_tolerance: rel,
            abs_tolerance: abs,
            flag,
            agrees: false,
        });
    }

    fn below(&mut self, label: impl Into<String>, published: &str, bound: f64, computed: f64, flag: Provenance) {
        self.push(Row {
            table: self.table.clone(),
            label: label.into(),
            published: published.to_string(),
            reference: ReferenceKind::Below,
            reference_value: Some(bound),
            resolution: None,
            computed,
            rel_delta: None,
            rel_tolerance: None,
            abs_tolerance: None,
            flag,
            agrees: false,
        });
    }

    fn derived(&mut self, label: impl Into<String>, published: &str, computed: f64) {
        self.push(Row {
            table: self.table.clone(),
            label: label.into(),
            published: published.to_string(),
            reference: ReferenceKind::None,
            reference_value: None,
            resolution: None,
            computed,
            rel_delta: None,
            rel_tolerance: None,
            abs_tolerance: None,
            flag: Provenance::DerivedOnly,
            agrees: false,
        });
    }

    fn finish(self, title: &str) -> TableReport {
        TableReport { id: self.table, title: title.to_string(), rows: self.rows }
    }
}

fn compute<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, ReportError> {
    r.map_err(|e| ReportError::Compute(e.to_string()))
}

const OK: Provenance = Provenance::MatchesFormula;
const BAD: Provenance = Provenance::Inconsistent;

fn emission_timeline(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("emission");
    let rewards = ["25", "50", "25", "12.5", "6.25", "3.125", "1.5625", "0.78125", "0.390625", "0.195", "0.15"];
    let supplies = [
        "141,750", "14,608,250", "21,983,250", "25,670,750", "27,514,500", "28,436,375", "28,897,313", "29,127,782",
        "29,243,016", "29,300,633",
    ];
    let rows = emission_schedule(params);
    for (i, row) in rows.iter().enumerate() {
        if let Some(r) = rewards.get(i) {
            b.approx(
                format!("{} reward (LAT)", row.phase),
                &format!("{r} LAT"),
                printed(r, 1.0),
                row.reward.as_lat(),
                Tol::Rel(0.0),
                OK,
            );
        }
        if let (Some(s), Some(cum)) = (supplies.get(i), row.cumulative_supply) {
            b.approx(
                format!("{} cumulative supply (LAT)", row.phase),
                s,
                printed(s, 1.0),
                cum.as_lat(),
                Tol::Abs(1.0),
                OK,
            );
        }
    }
    b.approx(
        "Tail annual addition (LAT/yr)",
        "+19,724/yr",
        printed("19,724", 1.0),
        annual_tail_emission(params).as_lat(),
        Tol::Abs(1.0),
        OK,
    );
    Ok(b.finish("Emission timeline"))
}

/// Phase name, first height, printed LAT/year and printed budgets at $1, $10, $100.
type BudgetRow = (&'static str, u64, &'static str, [(&'static str, f64); 3]);

fn security_budget_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("budget");
    let h = params.halving_interval;
    let phases: [BudgetRow; 6] = [
        ("Launch", params.warmup_blocks, "6,574,500", [("6.6", 1e6), ("65.7", 1e6), ("657.5", 1e6)]),
        ("Halving 1", h, "3,287,250", [("3.3", 1e6), ("32.9", 1e6), ("328.7", 1e6)]),
        ("Halving 2", 2 * h, "1,643,625", [("1.6", 1e6), ("16.4", 1e6), ("164.4", 1e6)]),
        ("Halving 3", 3 * h, "821,813", [("822", 1e3), ("8.2", 1e6), ("82.2", 1e6)]),
        ("Halving 4", 4 * h, "410,906", [("411", 1e3), ("4.1", 1e6), ("41.1", 1e6)]),
        ("Tail", 9 * h, "19,724", [("19.7", 1e3), ("197.2", 1e3), ("1.97", 1e6)]),
    ];
    for (phase, height, lat_year, budgets) in phases {
        let annual = block_subsidy(params, height).as_lat() * BLOCKS_PER_YEAR as f64;
        b.approx(format!("{phase} LAT/year"), lat_year, printed(lat_year, 1.0), annual, Tol::Rel(0.005), OK);
        for ((digits, scale), price) in budgets.into_iter().zip([1.0, 10.0, 100.0]) {
            let suffix = if scale == 1e6 { "M" } else { "K" };
            b.approx(
                format!("{phase} budget at ${price}/LAT (USD/yr)"),
                &format!("{digits}{suffix}"),
                printed(digits, scale),
                security_budget(params, height, price, 0.0),
                Tol::Rel(0.005),
                OK,
            );
        }
    }
    Ok(b.finish("Security budget"))
}

fn double_spend_table() -> Result<TableReport, ReportError> {
    let mut b = Builder::new("double-spend");
    let pct = |s: &str| printed(s, 0.01);
    // (q, [(k, printed percent or "<bound" text)])
    let grid: [(f64, [&str; 3]); 5] = [
        (0.10, ["0.14", "0.0002", "<1e-9"]),
        (0.20, ["1.56", "0.024", "<1e-6"]),
        (0.30, ["6.15", "0.378", "0.0014"]),
        (0.40, ["17.96", "3.23", "0.104"]),
        (0.45, ["29.98", "8.99", "0.81"]),
    ];
    for (q, cells) in grid {
        for (k, cell) in [3u32, 6, 12].into_iter().zip(cells) {
            let a = AttackerProfile::new(q, k);
            let bound = compute(double_spend_bound(a))?;
            let label = format!("q={q:.2} k={k} bound");
            let flag = if q < 0.25 { OK } else { BAD };
            if let Some(limit) = cell.strip_prefix('<') {
                let v: f64 = limit.parse().expect("bound literal");
                b.below(label, &format!("< {limit}"), v, bound, flag);
            } else {
                b.approx(label, &format!("{cell}%"), pct(cell), bound, Tol::Rel(0.01), flag);
                if flag == BAD {
                    let poisson = compute(double_spend_poisson(a))?;
                    b.approx(format!("q={q:.2} k={k} poisson"), &format!("{cell}%"), pct(cell), poisson, Tol::Rel(0.01), BAD);
                }
            }
        }
    }
    for (q, k) in [(0.10, "4"), (0.20, "7"), (0.30, "12"), (0.40, "27")] {
        let depth = compute(finality_confirmations(q, 1e-6))? as f64;
        b.approx(format!("finality depth q={q:.2} p=1e-6"), k, printed(k, 1.0), depth, Tol::Abs(0.0), BAD);
    }
    Ok(b.finish("Double-spend probability"))
}

fn recovery_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("recovery");
    let n = params.lwma_window;
    let spacing = params.spacing as f64;
    let rows = [
        (0u64, "9.0", "2,400"),
        (42, "4.5", "1,320"),
        (120, "1.21", "530"),
        (240, "0.16", "278"),
        (360, "0.022", "245"),
        (480, "0.003", "241"),
    ];
    for (m, dev, time) in rows {
        let eps = deviation_envelope(0.1, m, n);
        b.approx(format!("m={m} deviation"), dev, printed(dev, 1.0), eps, Tol::Rel(0.02), OK);
        b.approx(
            format!("m={m} block time (s)"),
            &format!("~{time}s"),
            printed(time, 1.0),
            block_time_at_deviation(eps, spacing),
            Tol::Rel(0.02),
            OK,
        );
    }
    Ok(b.finish("Recovery after a 10x hashrate drop"))
}

fn miner_energy_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("solo-mining");
    let pm = PowerModel::default();
    let reward = block_subsidy(params, params.warmup_blocks);
    let rows = [
        (10u64, "0.028", "0.067", "0.008", "0.00016"),
        (100, "0.28", "0.67", "0.08", "0.0016"),
        (1_000, "2.78", "6.67", "0.80", "0.016"),
        (10_000, "27.8", "66.7", "8.00", "0.16"),
        (100_000, "278", "667", "80.04", "1.60"),
    ];
    for (size, days, kwh, cost, be) in rows {
        let s = compute(solo_mining(&pm, params.spacing, size, reward))?;
        b.approx(format!("N={size} expected time (days)"), days, printed(days, 1.0), s.expected_days, Tol::Rel(0.01), OK);
        b.approx(format!("N={size} energy (kWh)"), kwh, printed(kwh, 1.0), s.energy_kwh, Tol::Rel(0.01), OK);
        b.approx(format!("N={size} cost (USD)"), &format!("${cost}"), printed(cost, 1.0), s.cost_usd, Tol::Rel(0.01), OK);
        b.approx(format!("N={size} break-even (USD/LAT)"), &format!("${be}"), printed(be, 1.0), s.break_even_usd, Tol::Rel(0.01), OK);
    }
    let s = compute(solo_mining(&pm, params.spacing, 100_000, reward))?;
    b.approx("N=100000 break-even quoted in prose (USD/LAT)", "$2.02", printed("2.02", 1.0), s.break_even_usd, Tol::Rel(0.01), BAD);
    Ok(b.finish("Solo-mining energy economics"))
}

fn cloud_ban_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("cloud-ban");
    let spacing = params.spacing as f64;
    let rows = [(0.1, "267", "~2 hours"), (0.3, "343", "~6 hours"), (0.5, "480", "~12 hours"), (0.8, "1,200", "~1.5 days")];
    for (loss, time, recovery) in rows {
        let pct = (loss * 100.0f64).round();
        b.approx(
            format!("{pct}% banned block time (s)"),
            &format!("~{time}s"),
            printed(time, 1.0),
            compute(degraded_block_time(loss, spacing))?,
            Tol::Abs(1.0),
            OK,
        );
        let blocks = recovery_blocks(1.0 - loss, crate::sim::RECOVERY_TOLERANCE, params.lwma_window);
        b.derived(format!("{pct}% banned recovery to 7% (hours at T)"), recovery, blocks as f64 * spacing / 3600.0);
    }
    Ok(b.finish("Cloud provider ban"))
}

fn botnet_table() -> Result<TableReport, ReportError> {
    let mut b = Builder::new("botnet");
    let rows = [
        (10_000u64, "20", "3,000"),
        (100_000, "200", "30,000"),
        (1_000_000, "2,000", "300,000"),
        (5_000_000, "10,000", "1,500,000"),
    ];
    for (bots, mhs, nodes) in rows {
        let est = compute(botnet_hashrate(bots, 2_000.0, DEFAULT_NODE_HASHRATE))?;
        b.approx(format!("{bots} bots total (H/s)"), &format!("~{mhs} MH/s"), printed(mhs, 1e6), est.total_hashrate, Tol::Rel(0.0), OK);
        b.approx(format!("{bots} bots dedicated-node equivalent"), &format!("~{nodes}"), printed(nodes, 1.0), est.equivalent_nodes, Tol::Rel(0.001), OK);
    }
    Ok(b.finish("Botnet hashrate"))
}

fn orphan_table() -> Result<TableReport, ReportError> {
    let mut b = Builder::new("orphan");
    let rows = [
        ("100 KB", 1e5, ["0.03", "0.08", "0.34"]),
        ("1 MB", 1e6, ["0.28", "0.70", "3.17"]),
        ("4 MB", 4e6, ["1.11", "2.78", "12.6"]),
        ("10 MB", 1e7, ["2.76", "6.90", "31.2"]),
    ];
    for (size_label, size, cells) in rows {
        for (t, cell) in [600.0, 240.0, 53.0].into_iter().zip(cells) {
            let p = compute(orphan_probability(NetworkLink { block_size: size, bandwidth: 1e6, diameter: 6.0, block_time: t }))?;
            b.approx(format!("{size_label} at T={t}s"), &format!("{cell}%"), printed(cell, 0.01), p, Tol::Rel(0.05), BAD);
        }
    }
    // the published rows keep the formula's inverse scaling in T
    let p = |t| orphan_probability(NetworkLink { block_size: 1e6, bandwidth: 1e6, diameter: 6.0, block_time: t });
    let ratio = compute(p(240.0))? / compute(p(600.0))?;
    b.approx("1 MB ratio T=240s / T=600s", "0.70/0.28", printed("2.5", 1.0), ratio, Tol::Rel(0.02), OK);
    Ok(b.finish("Orphan probability"))
}

fn storage_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("storage");
    let w = max_block_weight(params, u64::MAX);
    let spacing = params.spacing as f64;
    let yearly = |bytes: f64| bytes * SECONDS_PER_YEAR as f64 / spacing;
    let rows = [
        ("500 B blocks", 500.0, "~66 MB", printed("66", 1e6)),
        ("10 KB blocks", 1e4, "~1.3 GB", printed("1.3", 1e9)),
        ("100 KB blocks", 1e5, "~13 GB", printed("13", 1e9)),
        ("1 MB blocks", 1e6, "~131 GB", printed("131", 1e9)),
        ("3.5 MB blocks", 3.5e6, "~460 GB", printed("460", 1e9)),
    ];
    for (label, bytes, text, p) in rows {
        b.approx(format!("{label} growth (bytes/yr)"), text, p, yearly(bytes), Tol::Rel(0.01), OK);
    }
    let full = compute(storage_growth(1.0, w, spacing))?;
    b.approx("full blocks growth (bytes/yr)", "~7.4 TB", printed("7.4", 1e12), full, Tol::Rel(0.01), OK);
    b.approx("full block size (bytes)", "~14 MB", printed("14", 1e6), w as f64, Tol::Rel(0.05), BAD);
    b.approx("growth per second at full blocks (bytes/s)", "233,333", printed("233,333", 1.0), w as f64 / spacing, Tol::Rel(1e-5), OK);
    Ok(b.finish("Storage growth"))
}

fn attack_cost_table() -> Result<TableReport, ReportError> {
    let mut b = Builder::new("attack-cost");
    let rows = [(100u64, "50"), (1_000, "500"), (10_000, "5,000"), (100_000, "50,000"), (1_000_000, "500,000")];
    for (nodes, cost) in rows {
        let m = CostModel { h_honest: nodes as f64 * 5_000.0, h_core: 5_000.0, c_cpu: 0.05, c_ram: 0.0, hours: 1.0 };
        let needed = m.h_honest / m.h_core + 1.0;
        let needed_text = format!("{} nodes", nodes + 1);
        b.approx(format!("{nodes} nodes attacker needs"), &needed_text, printed(&(nodes + 1).to_string(), 1.0), needed, Tol::Abs(0.0), OK);
        b.approx(format!("{nodes} nodes cloud cost 1h (USD)"), &format!("~${cost}"), printed(cost, 1.0), compute(attack_cost_51(m))?, Tol::Rel(0.05), BAD);
    }
    Ok(b.finish("51% attack cost"))
}

fn constants_table(params: &ChainParams) -> Result<TableReport, ReportError> {
    let mut b = Builder::new("constants");
    let n = params.lwma_window;
    let t = params.spacing as f64;
    let w = max_block_weight(params, u64::MAX);
    b.approx("TPS at 16,000 WU", "3,500/240", printed("14.58", 1.0), compute(tps_max(w, 16_000, t))?, Tol::Abs(0.01), OK);
    b.approx("TPS at 4,900 WU", "~47 tx/s", printed("47", 1.0), compute(tps_max(w, 4_900, t))?, Tol::Rel(0.02), OK);
    b.approx("IBD single core (s)", "1,645 s", printed("1,645", 1.0), compute(ibd_verify_time(32.9e6, 20_000.0, 1))?, Tol::Abs(1.0), OK);
    b.approx("IBD four cores (s)", "~5 minutes", printed("5", 60.0), compute(ibd_verify_time(32.9e6, 20_000.0, 4))?, Tol::Rel(0.1), BAD);
    let (classical, quantum) = compute(lattice_attack_bits(1024))?;
    b.approx("lattice classical bits d=1024", "2^299", printed("299", 1.0), classical, Tol::Rel(0.0), OK);
    b.approx("lattice quantum bits d=1024", "2^271", printed("271", 1.0), quantum, Tol::Rel(0.0), OK);
    b.approx("quantum margin over 128 bits", "2^143", printed("143", 1.0), quantum - 128.0, Tol::Rel(0.0), OK);
    b.approx("LWMA half-life (blocks)", "41.5", printed("41.5", 1.0), half_life_blocks(n), Tol::Abs(0.1), OK);
    b.approx("decay over one window", "0.135", printed("0.135", 1.0), decay_factor(n, n), Tol::Abs(0.001), OK);
    b.approx("recovery to 7% after 10x drop (blocks)", "291", printed("291", 1.0), recovery_blocks(0.1, 0.07, n) as f64, Tol::Abs(1.0), OK);
    b.approx("oscillation bound delta=2 P=240", "0.10T", printed("0.10", 1.0), oscillation_avg_bound(2.0, 240, n), Tol::Rel(0.01), OK);
    b.approx("fee variance threshold (LAT^2)", "0.0025", printed("0.0025", 1.0), fee_sniping_threshold(0.1, params.tail_emission.as_lat()), Tol::Rel(1e-12), OK);
    let tail = params.tail_emission.as_lat();
    b.approx("tail subsidy squared (LAT^2)", "0.0225", printed("0.0225", 1.0), tail * tail, Tol::Rel(1e-12), OK);
    for (yr, text) in [(0u32, "0.067"), (53, "0.065"), (153, "0.061"), (353, "0.054")] {
        b.approx(format!("inflation at t={yr} (fraction/yr)"), &format!("{text}%"), printed(text, 0.01), inflation_rate(params, yr as f64), Tol::Rel(0.001), OK);
    }
    b.approx("max money year", "~644", printed("644", 1.0), max_money_year(params) as f64, Tol::Abs(2.0), OK);
    let first_halving_years = height_to_time(params, params.halving_interval) as f64 / SECONDS_PER_YEAR as f64;
    b.approx("first halving (years)", "2.21", printed("2.21", 1.0), first_halving_years, Tol::Rel(0.005), OK);
    let warmup_hours = height_to_time(params, params.warmup_blocks) as f64 / 3600.0;
    b.approx("warm-up duration (hours)", "83.5", printed("83.5", 1.0), warmup_hours, Tol::Rel(0.005), OK);
    let s0 = compute(cumulative_supply(params, 9 * params.halving_interval - 1))?;
    b.approx("supply at tail onset (LAT)", "29,300,633", printed("29,300,633", 1.0), s0.as_lat(), Tol::Abs(1.0), OK);
    let be = compute(break_even_price(params.tail_emission, 0.008))?;
    b.approx("tail break-even at $0.008/block (USD/LAT)", "$0.053", printed("0.053", 1.0), be, Tol::Rel(0.01), OK);
    Ok(b.finish("Scalar constants"))
}

/// Rebuilds one table.
///
/// ```
/// use powlab::consensus::ChainParams;
/// use powlab::report::reproduce;
/// let t = reproduce("recovery", &ChainParams::default()).unwrap();
/// assert!(t.all_within_tolerance());
/// ```
pub fn reproduce(id: &str, params: &ChainParams) -> Result<TableReport, ReportError> {
    match id {
        "emission" => emission_timeline(params),
        "budget" => security_budget_table(params),
        "double-spend" => double_spend_table(),
        "recovery" => recovery_table(params),
        "solo-mining" => miner_energy_table(params),
        "cloud-ban" => cloud_ban_table(params),
        "botnet" => botnet_table(),
        "orphan" => orphan_table(),
        "storage" => storage_table(params),
        "attack-cost" => attack_cost_table(),
        "constants" => constants_table(params),
        other => Err(ReportError::UnknownTable(other.to_string())),
    }
}

/// Every table, in [`ALL_TABLE_IDS`] order.
pub fn deltas(params: &ChainParams) -> Result<Vec<TableReport>, ReportError> {
    ALL_TABLE_IDS.iter().map(|id| reproduce(id, params)).collect()
}

/// One CSV line: a row plus its table's title.
#[derive(Serialize, Deserialize)]
struct CsvRow {
    table: String,
    title: String,
    label: String,
    published: String,
    reference: ReferenceKind,
    reference_value: Option<f64>,
    resolution: Option<f64>,
    computed: f64,
    rel_delta: Option<f64>,
    rel_tolerance: Option<f64>,
    abs_tolerance: Option<f64>,
    flag: Provenance,
    agrees: bool,
}

pub fn to_csv(reports: &[TableReport]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for row in &r.rows {
            let row = row.clone();
            w.serialize(CsvRow {
                table: row.table,
                title: r.title.clone(),
                label: row.label,
                published: row.published,
                reference: row.reference,
                reference_value: row.reference_value,
                resolution: row.resolution,
                computed: row.computed,
                rel_delta: row.rel_delta,
                rel_tolerance: row.rel_tolerance,
                abs_tolerance: row.abs_tolerance,
                flag: row.flag,
                agrees: row.agrees,
            })?;
        }
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Compute(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Inverse of [`to_csv`]; rows group into tables by consecutive table id.
pub fn from_csv(text: &str) -> Result<Vec<TableReport>, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out: Vec<TableReport> = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        let c = rec?;
        let row = Row {
            table: c.table,
            label: c.label,
            published: c.published,
            reference: c.reference,
            reference_value: c.reference_value,
            resolution: c.resolution,
            computed: c.computed,
            rel_delta: c.rel_delta,
            rel_tolerance: c.rel_tolerance,
            abs_tolerance: c.abs_tolerance,
            flag: c.flag,
            agrees: c.agrees,
        };
        match out.last_mut() {
            Some(t) if t.id == row.table => t.rows.push(row),
            _ => out.push(TableReport { id: row.table.clone(), title: c.title, rows: vec![row] }),
        }
    }
    Ok(out)
}

/// Plain number for display: scientific below 1e-4 (and above 1e12).
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-4..1e12).contains(&a) {
        format!("{v:.4e}")
    } else if a >= 1000.0 {
        format!("{v:.2}")
    } else {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Aligned text rendering; inconsistent rows show both numbers.
pub fn render_human(reports: &[TableReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "== {} ({}) ==", r.title, r.id);
        let width = r.rows.iter().map(|row| row.label.len()).max().unwrap_or(0);
        for row in &r.rows {
            let delta = row.rel_delta.map(|d| format!("{:.2}%", d * 100.0)).unwrap_or_else(|| "-".into());
            let status = match (row.flag, row.agrees) {
                (Provenance::DerivedOnly, _) => "n/a",
                (_, true) => "ok",
                (_, false) => "differs",
            };
            let _ = writeln!(
                out,
                "{:<width$}  published {:>14}  computed {:>14}  delta {:>9}  {:<18} {}",
                row.label,
                row.published,
                format_value(row.computed),
                delta,
                row.flag.as_str(),
                status,
            );
        }
        out.push('\n');
    }
    out
}
