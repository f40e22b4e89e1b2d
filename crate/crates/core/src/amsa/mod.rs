//! The chair agent.
//!
//! The chair splits the run into fixed-length periods. During each period
//! it trades with the agents it selected ("real" environment) while an
//! internal backtest replays the same period with every agent, each starting
//! from an even share of the nominal initial inventory. At each period
//! boundary all orders are cancelled, the backtest results decide which
//! agents trade next (positive ROI and positive alpha over buy-and-hold),
//! and the chair's inventory is split evenly between them.

mod experiment;
mod history;
mod schedule;
mod selection;
mod session;

use std::ops::{Add, AddAssign};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentParams, Family, GridSpec};
use crate::exchange::{AgentId, Fill, MatchRules};
use crate::marketdata::Granularity;

pub use experiment::{build_cohort, run_experiment};
pub use history::{write_inventory_history, INVENTORY_HISTORY_HEADER};
pub use schedule::period_schedule;
pub use selection::{count_totals, redistribute_inventory, select_best, Redistribution};
pub use session::run_internal_backtest;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AmsaError {
    #[error("run span of {span_ms} ms is shorter than one period ({period_ms} ms)")]
    ShortSpan { span_ms: i64, period_ms: i64 },
    #[error("{0}")]
    Misaligned(String),
    #[error("experiment is configured for {config} data but the dataset is {data}")]
    GranularityMismatch { config: Granularity, data: Granularity },
    #[error("dataset does not cover {what} (needs snapshot at {timestamp})")]
    Coverage { what: &'static str, timestamp: i64 },
    #[error("data gap: missing snapshot at {timestamp}")]
    DataGap { timestamp: i64 },
    #[error("period results mix periods {0} and {1}")]
    MixedPeriods(usize, usize),
    #[error("family {0} is listed more than once")]
    DuplicateFamily(Family),
    #[error("no agents configured")]
    EmptyCohort,
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

/// A pair of base and quote amounts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub base: Decimal,
    pub quote: Decimal,
}

impl Inventory {
    pub fn new(base: Decimal, quote: Decimal) -> Self {
        Self { base, quote }
    }

    /// Mark-to-market value at `price`.
    pub fn value_at(&self, price: Decimal) -> Decimal {
        self.base * price + self.quote
    }
}

impl Add for Inventory {
    type Output = Inventory;

    fn add(self, rhs: Inventory) -> Inventory {
        Inventory::new(self.base + rhs.base, self.quote + rhs.quote)
    }
}

impl AddAssign for Inventory {
    fn add_assign(&mut self, rhs: Inventory) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Inventory {
    fn sum<I: Iterator<Item = Inventory>>(iter: I) -> Inventory {
        iter.fold(Inventory::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Positive backtest ROI and alpha.
    #[default]
    BacktestOnly,
    /// Additionally, agents that traded for real must have had positive
    /// real ROI and alpha.
    BacktestAndReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Real,
    Backtest,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Real => "real",
            EnvKind::Backtest => "backtest",
        }
    }
}

/// A family and optional grid overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub grid: Option<GridSpec>,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        Self { family, grid: None }
    }
}

/// Everything the experiment loop needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub granularity: Granularity,
    pub period_days: u32,
    pub families: Vec<FamilySpec>,
    pub initial_base: Decimal,
    /// `None` credits quote worth `initial_base` at the first mid.
    pub initial_quote: Option<Decimal>,
    pub rules: MatchRules,
    pub selection: SelectionPolicy,
    /// First timestamp traded for real; the warmup backtest covers the
    /// period before it.
    pub start_time: i64,
    /// Exclusive end of the run.
    pub end_time: i64,
    /// Sizing knobs; the price scale is taken from the dataset.
    pub params: AgentParams,
    /// Keep every real-environment fill in the history.
    pub record_fills: bool,
}

impl ExperimentConfig {
    /// Defaults: all four families, 0.1 base plus the same value in quote,
    /// default matching rules and backtest-only selection.
    pub fn new(granularity: Granularity, period_days: u32, start_time: i64, end_time: i64) -> Self {
        Self {
            granularity,
            period_days,
            families: [Family::Base, Family::Skewed, Family::PureMm, Family::Hodler]
                .into_iter()
                .map(FamilySpec::new)
                .collect(),
            initial_base: Decimal::new(1, 1),
            initial_quote: None,
            rules: MatchRules::default(),
            selection: SelectionPolicy::default(),
            start_time,
            end_time,
            params: AgentParams::default(),
            record_fills: false,
        }
    }

    pub fn period_ms(&self) -> i64 {
        i64::from(self.period_days) * self.granularity.intervals_per_day() * self.granularity.interval_ms()
    }
}

/// Outcome of one agent over one period in one environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodResult {
    /// 0 is the warmup backtest; trading periods start at 1.
    pub period: usize,
    pub agent: AgentId,
    pub env: EnvKind,
    pub start_value: Decimal,
    pub end_value: Decimal,
    pub roi_pct: Decimal,
    pub alpha_pct: Decimal,
}

/// State of the chair at one period boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryRecord {
    /// Index of the period that just ended (0 for the warmup).
    pub period: usize,
    /// Boundary time: start of the next period, or the run end.
    pub timestamp: i64,
    /// Timestamp of the snapshot used for valuation.
    pub valued_at: i64,
    pub results: Vec<PeriodResult>,
    /// Real-environment holdings at the end of the period, orders cancelled.
    pub holdings: Vec<(AgentId, Inventory)>,
    /// Chair funds not allocated to any agent during the period.
    pub unallocated: Inventory,
    /// Holdings plus unallocated funds.
    pub chair_inventory: Inventory,
    pub chair_value: Decimal,
    /// Agents trading for real in the next period (empty at the run end).
    pub selected: Vec<AgentId>,
    /// Shares handed to `selected`.
    pub allocations: Vec<(AgentId, Inventory)>,
    /// Funds the chair keeps back for the next period.
    pub retained: Inventory,
    /// Chair ROI since the run start, and alpha over holding the initial
    /// inventory for the same span.
    pub chair_roi_pct: Decimal,
    pub chair_alpha_pct: Decimal,
}

/// Whole-run outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub initial: Inventory,
    pub initial_value: Decimal,
    pub final_value: Decimal,
    pub roi_pct: Decimal,
    pub hodler_roi_pct: Decimal,
    pub alpha_pct: Decimal,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryHistory {
    /// `(id, family, label)` of every agent in the cohort.
    pub agents: Vec<(AgentId, Family, String)>,
    pub records: Vec<BoundaryRecord>,
    pub summary: RunSummary,
    /// Real-environment fills, when requested.
    pub fills: Vec<Fill>,
}
