use rust_decimal::Decimal;

use super::{EnvKind, Inventory, PeriodResult};
use crate::agents::{Agent, MarketView, Marketable};
use crate::exchange::{mid_price, AgentId, Fill, MatchRules, Side, SimEnvironment};
use crate::marketdata::MarketDataset;
use crate::metrics::{compute_alpha, compute_roi, hodler_round_trip};
use crate::Result;

/// A group of agents trading in one environment over one or more periods.
pub(crate) struct Session {
    kind: EnvKind,
    env: SimEnvironment,
    agents: Vec<Agent>,
    starts: Vec<(AgentId, Inventory)>,
    fills: Option<Vec<Fill>>,
}

impl Session {
    pub fn new(kind: EnvKind, rules: MatchRules, record_fills: bool) -> Self {
        Self {
            kind,
            env: SimEnvironment::new(rules),
            agents: Vec::new(),
            starts: Vec::new(),
            fills: record_fills.then(Vec::new),
        }
    }

    /// Opens a fresh account for each `(agent, share)` pair, dropping any
    /// previous agents.
    pub fn fund(&mut self, cohort: &[Agent], shares: &[(AgentId, Inventory)]) -> Result<()> {
        self.agents.clear();
        for &(id, share) in shares {
            self.env.open_account(id, share.base, share.quote)?;
            let mut agent = cohort
                .iter()
                .find(|a| a.id == id)
                .cloned()
                .ok_or(crate::exchange::SimError::UnknownAgent(id))?;
            agent.reset();
            self.agents.push(agent);
        }
        self.starts = shares.to_vec();
        Ok(())
    }

    /// One agent refresh plus the interval's trade replay.
    pub fn refresh(&mut self, ds: &MarketDataset, index: usize, first: bool, last: bool) -> Result<()> {
        let snapshots = ds.snapshots();
        let snapshot = &snapshots[index];
        let previous = index.checked_sub(1).map(|i| &snapshots[i]);
        for agent in &mut self.agents {
            let action = {
                let Some(account) = self.env.account(agent.id) else {
                    continue;
                };
                let view = MarketView {
                    snapshot,
                    previous,
                    time: snapshot.timestamp,
                    is_first_refresh: first,
                    is_last_refresh: last,
                    account,
                    open_orders: self.env.open_orders(agent.id),
                };
                agent.handle_orders(&view)
            };
            if action.is_empty() {
                continue;
            }
            for id in action.cancels {
                self.env.cancel_order(id)?;
            }
            for m in action.marketable {
                let account = self.env.account(agent.id).expect("funded agent");
                let (side, amount) = match m {
                    Marketable::BuyAllQuote => (Side::Bid, account.quote_free),
                    Marketable::SellAllBase => (Side::Ask, account.base_free),
                };
                if amount > Decimal::ZERO {
                    let fills = self.env.execute_marketable(agent.id, side, amount, snapshot)?;
                    if let Some(log) = &mut self.fills {
                        log.extend(fills);
                    }
                }
            }
            for p in action.placements {
                self.env.place_order(agent.id, p.side, p.price, p.quantity)?;
            }
        }
        let report = self.env.step_interval(snapshot, ds.interval_trades(index));
        if let Some(log) = &mut self.fills {
            log.extend(report.fills);
        }
        Ok(())
    }

    /// Cancels all orders, closes every account and scores each agent over
    /// snapshots `first..=last`.
    pub fn close_period(
        &mut self,
        ds: &MarketDataset,
        period: usize,
        first: usize,
        last: usize,
    ) -> Result<(Vec<PeriodResult>, Vec<(AgentId, Inventory)>)> {
        let open = &ds.snapshots()[first];
        let close = &ds.snapshots()[last];
        let start_mid = mid_price(open)?;
        let end_mid = mid_price(close)?;
        let fee = self.env.rules().fee_rate;
        self.env.cancel_everything()?;
        let mut results = Vec::with_capacity(self.starts.len());
        let mut holdings = Vec::with_capacity(self.starts.len());
        for &(id, start) in &self.starts {
            let account = self.env.close_account(id)?;
            let held = Inventory::new(account.base_total(), account.quote_total());
            let start_value = start.value_at(start_mid);
            let end_value = held.value_at(end_mid);
            let roi_pct = compute_roi(start_value, end_value)?;
            let hodler = hodler_round_trip(open, close, start.base, start.quote, fee)?;
            results.push(PeriodResult {
                period,
                agent: id,
                env: self.kind,
                start_value,
                end_value,
                roi_pct,
                alpha_pct: compute_alpha(roi_pct, hodler.roi_pct),
            });
            holdings.push((id, held));
        }
        self.agents.clear();
        self.starts.clear();
        Ok((results, holdings))
    }

    pub fn take_fills(&mut self) -> Vec<Fill> {
        self.fills.as_mut().map(std::mem::take).unwrap_or_default()
    }
}

/// Backtests every agent over the whole of `slice`, each from its own
/// share in `shares`, and scores them as period `period`.
pub fn run_internal_backtest(
    agents: &[Agent],
    slice: &MarketDataset,
    shares: &[(AgentId, Inventory)],
    rules: MatchRules,
    period: usize,
) -> Result<Vec<PeriodResult>> {
    let n = slice.len();
    if n == 0 {
        return Err(crate::marketdata::DataError::Slice("backtest slice is empty".into()).into());
    }
    let mut session = Session::new(EnvKind::Backtest, rules, false);
    session.fund(agents, shares)?;
    for i in 0..n {
        session.refresh(slice, i, i == 0, i == n - 1)?;
    }
    Ok(session.close_period(slice, period, 0, n - 1)?.0)
}
