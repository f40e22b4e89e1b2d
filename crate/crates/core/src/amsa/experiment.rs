use std::collections::BTreeSet;

use super::selection::{redistribute_inventory, select_best};
use super::session::Session;
use super::{
    AmsaError, BoundaryRecord, EnvKind, ExperimentConfig, InventoryHistory, Inventory, RunSummary, SelectionPolicy,
};
use crate::agents::{enumerate_family, Agent, AgentConfig, AgentParams};
use crate::exchange::{mid_price, AgentId};
use crate::marketdata::MarketDataset;
use crate::metrics::{compute_alpha, compute_roi, hodler_round_trip};
use crate::num::{round_half_up, ASSET_SCALE};
use crate::Result;

/// Expands the configured families into agents with consecutive ids.
pub fn build_cohort(cfg: &ExperimentConfig, params: AgentParams) -> Result<Vec<Agent>> {
    let mut seen = BTreeSet::new();
    let mut agents = Vec::new();
    for spec in &cfg.families {
        if !seen.insert(spec.family) {
            return Err(AmsaError::DuplicateFamily(spec.family).into());
        }
        for config in enumerate_family(spec.family, spec.grid.as_ref())? {
            config.validate()?;
            let id = AgentId(agents.len() as u32);
            agents.push(Agent::new(id, config, params));
        }
    }
    if agents.is_empty() {
        return Err(AmsaError::EmptyCohort.into());
    }
    Ok(agents)
}

/// Maps timestamps to snapshot indices after checking coverage.
struct Timeline {
    first_index: usize,
    first_ts: i64,
    step: i64,
}

impl Timeline {
    fn new(ds: &MarketDataset, from: i64, to: i64) -> Result<Self> {
        let step = ds.granularity().interval_ms();
        let first_index = ds.index_of(from).ok_or(AmsaError::Coverage {
            what: "the warmup start",
            timestamp: from,
        })?;
        let last_ts = to - step;
        let last_index = ds.index_of(last_ts).ok_or(AmsaError::Coverage {
            what: "the run end",
            timestamp: last_ts,
        })?;
        let expected = ((last_ts - from) / step) as usize;
        if last_index - first_index != expected || !ds.is_contiguous(first_index, last_index) {
            let snaps = &ds.snapshots()[first_index..=last_index];
            let gap = snaps
                .windows(2)
                .find(|w| w[1].timestamp - w[0].timestamp != step)
                .map_or(from, |w| w[0].timestamp + step);
            return Err(AmsaError::DataGap { timestamp: gap }.into());
        }
        Ok(Self {
            first_index,
            first_ts: from,
            step,
        })
    }

    fn index(&self, ts: i64) -> usize {
        self.first_index + ((ts - self.first_ts) / self.step) as usize
    }
}

fn check_config(cfg: &ExperimentConfig, ds: &MarketDataset) -> Result<()> {
    if cfg.granularity != ds.granularity() {
        return Err(AmsaError::GranularityMismatch {
            config: cfg.granularity,
            data: ds.granularity(),
        }
        .into());
    }
    let invalid = |m: &str| Err(AmsaError::InvalidConfig(m.to_string()).into());
    if cfg.initial_base < rust_decimal::Decimal::ZERO {
        return invalid("initial_base must not be negative");
    }
    if matches!(cfg.initial_quote, Some(q) if q < rust_decimal::Decimal::ZERO) {
        return invalid("initial_quote must not be negative");
    }
    if cfg.rules.fee_rate < rust_decimal::Decimal::ZERO || cfg.rules.fee_rate >= rust_decimal::Decimal::ONE {
        return invalid("fee_rate must be in [0, 1)");
    }
    if cfg.params.order_fraction <= rust_decimal::Decimal::ZERO || cfg.params.order_fraction > rust_decimal::Decimal::ONE {
        return invalid("order_fraction must be in (0, 1]");
    }
    Ok(())
}

/// Runs the chair over `[start_time, end_time)` after a warmup backtest of
/// one period before `start_time`.
pub fn run_experiment(cfg: &ExperimentConfig, ds: &MarketDataset) -> Result<InventoryHistory> {
    check_config(cfg, ds)?;
    let bounds = super::period_schedule(cfg.start_time, cfg.end_time, cfg.period_days, cfg.granularity)?;
    let warmup_start = cfg.start_time - cfg.period_ms();
    let timeline = Timeline::new(ds, warmup_start, cfg.end_time)?;

    let params = AgentParams {
        price_scale: ds.price_scale(),
        ..cfg.params
    };
    let cohort = build_cohort(cfg, params)?;
    let everyone: BTreeSet<AgentId> = cohort.iter().map(|a| a.id).collect();
    // A cohort of buy-and-hold agents cannot beat itself; it trades as is.
    let baseline_only = cohort.iter().all(|a| a.config == AgentConfig::Hodler);

    let snaps = ds.snapshots();
    let run_first = timeline.index(cfg.start_time);
    let run_last = timeline.index(cfg.end_time) - 1;
    let start_mid = mid_price(&snaps[run_first])?;
    let initial = Inventory::new(
        cfg.initial_base,
        cfg.initial_quote
            .unwrap_or_else(|| round_half_up(cfg.initial_base * start_mid, ASSET_SCALE)),
    );
    let initial_value = initial.value_at(start_mid);
    let backtest_shares = redistribute_inventory(initial, &everyone).shares;

    let choose = |bt: &[super::PeriodResult], real: &[super::PeriodResult]| -> Result<BTreeSet<AgentId>> {
        if baseline_only {
            return Ok(everyone.clone());
        }
        let real = (cfg.selection == SelectionPolicy::BacktestAndReal).then_some(real);
        Ok(select_best(bt, real, cfg.selection)?)
    };

    // Warmup backtest.
    let mut backtest = Session::new(EnvKind::Backtest, cfg.rules, false);
    backtest.fund(&cohort, &backtest_shares)?;
    let (w0, w1) = (timeline.index(warmup_start), run_first - 1);
    for i in w0..=w1 {
        backtest.refresh(ds, i, i == w0, i == w1)?;
    }
    let (warm_results, _) = backtest.close_period(ds, 0, w0, w1)?;
    let selected = choose(&warm_results, &[])?;
    let split = redistribute_inventory(initial, &selected);

    let mut records = vec![BoundaryRecord {
        period: 0,
        timestamp: cfg.start_time,
        valued_at: snaps[run_first].timestamp,
        results: warm_results,
        holdings: Vec::new(),
        unallocated: initial,
        chair_inventory: initial,
        chair_value: initial_value,
        selected: selected.iter().copied().collect(),
        allocations: split.shares.clone(),
        retained: split.retained,
        chair_roi_pct: rust_decimal::Decimal::ZERO,
        chair_alpha_pct: rust_decimal::Decimal::ZERO,
    }];

    let mut real = Session::new(EnvKind::Real, cfg.rules, cfg.record_fills);
    real.fund(&cohort, &split.shares)?;
    let mut retained = split.retained;

    let periods = bounds.len() - 1;
    let mut hodler_roi_pct = rust_decimal::Decimal::ZERO;
    for p in 1..=periods {
        let a = timeline.index(bounds[p - 1]);
        let b = timeline.index(bounds[p]) - 1;
        backtest.fund(&cohort, &backtest_shares)?;
        for i in a..=b {
            real.refresh(ds, i, i == run_first, i == run_last)?;
            backtest.refresh(ds, i, i == a, i == b)?;
        }
        let (bt_results, _) = backtest.close_period(ds, p, a, b)?;
        let (real_results, holdings) = real.close_period(ds, p, a, b)?;

        let unallocated = retained;
        let chair_inventory = holdings.iter().map(|h| h.1).sum::<Inventory>() + unallocated;
        let end_mid = mid_price(&snaps[b])?;
        let chair_value = chair_inventory.value_at(end_mid);
        let chair_roi_pct = compute_roi(initial_value, chair_value)?;
        let hodler = hodler_round_trip(&snaps[run_first], &snaps[b], initial.base, initial.quote, cfg.rules.fee_rate)?;
        hodler_roi_pct = hodler.roi_pct;

        let selected = if p < periods {
            choose(&bt_results, &real_results)?
        } else {
            BTreeSet::new()
        };
        let split = redistribute_inventory(chair_inventory, &selected);
        if p < periods {
            real.fund(&cohort, &split.shares)?;
            retained = split.retained;
        }

        let mut results = bt_results;
        results.extend(real_results);
        records.push(BoundaryRecord {
            period: p,
            timestamp: bounds[p],
            valued_at: snaps[b].timestamp,
            results,
            holdings,
            unallocated,
            chair_inventory,
            chair_value,
            selected: selected.into_iter().collect(),
            allocations: split.shares,
            retained: split.retained,
            chair_roi_pct,
            chair_alpha_pct: compute_alpha(chair_roi_pct, hodler.roi_pct),
        });
    }

    let last = records.last().expect("at least one trading period");
    let summary = RunSummary {
        initial,
        initial_value,
        final_value: last.chair_value,
        roi_pct: last.chair_roi_pct,
        hodler_roi_pct,
        alpha_pct: last.chair_alpha_pct,
    };
    Ok(InventoryHistory {
        agents: cohort.iter().map(|a| (a.id, a.config.family(), a.config.label())).collect(),
        records,
        summary,
        fills: real.take_fills(),
    })
}
