use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;

use super::{AmsaError, EnvKind, Inventory, PeriodResult, SelectionPolicy};
use crate::exchange::{account_value, AgentId, SimEnvironment, SimError};
use crate::marketdata::OrderBookSnapshot;
use crate::num::{tick, ASSET_SCALE};

/// Mark-to-market value of every account in `env`, locked funds included.
pub fn count_totals(env: &SimEnvironment, snapshot: &OrderBookSnapshot) -> Result<BTreeMap<AgentId, Decimal>, SimError> {
    env.accounts()
        .map(|a| Ok((a.agent, account_value(a, snapshot)?)))
        .collect()
}

fn positive(r: &PeriodResult) -> bool {
    r.roi_pct > Decimal::ZERO && r.alpha_pct > Decimal::ZERO
}

/// Agents whose backtest ROI and alpha are both strictly positive. Under
/// [`SelectionPolicy::BacktestAndReal`], agents present in `real` must also
/// have positive real ROI and alpha.
pub fn select_best(
    backtest: &[PeriodResult],
    real: Option<&[PeriodResult]>,
    policy: SelectionPolicy,
) -> Result<BTreeSet<AgentId>, AmsaError> {
    let all = backtest.iter().chain(real.unwrap_or_default());
    let mut period = None;
    for r in all {
        match period {
            None => period = Some(r.period),
            Some(p) if p != r.period => return Err(AmsaError::MixedPeriods(p, r.period)),
            Some(_) => {}
        }
    }
    let mut chosen: BTreeSet<AgentId> = backtest.iter().filter(|r| positive(r)).map(|r| r.agent).collect();
    if policy == SelectionPolicy::BacktestAndReal {
        for r in real.unwrap_or_default() {
            if r.env == EnvKind::Real && !positive(r) {
                chosen.remove(&r.agent);
            }
        }
    }
    Ok(chosen)
}

/// Even split of an inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redistribution {
    /// One share per selected agent, ascending id.
    pub shares: Vec<(AgentId, Inventory)>,
    /// What stays with the chair: everything when nobody is selected,
    /// otherwise only amounts below asset precision.
    pub retained: Inventory,
}

fn split(total: Decimal, n: usize) -> (Vec<Decimal>, Decimal) {
    if total <= Decimal::ZERO {
        return (vec![Decimal::ZERO; n], total);
    }
    let unit = tick(ASSET_SCALE);
    let ticks = (total / unit).floor();
    let dust = total - ticks * unit;
    let n_dec = Decimal::from(n);
    let each = (ticks / n_dec).floor();
    let extra = ticks - each * n_dec;
    let shares = (0..n)
        .map(|i| {
            let bonus = if Decimal::from(i) < extra { Decimal::ONE } else { Decimal::ZERO };
            (each + bonus) * unit
        })
        .collect();
    (shares, dust)
}

/// Splits `total` evenly at asset precision. Remainder ticks go one each
/// to the lowest agent ids, so shares differ by at most one tick.
pub fn redistribute_inventory(total: Inventory, selected: &BTreeSet<AgentId>) -> Redistribution {
    if selected.is_empty() {
        return Redistribution {
            shares: Vec::new(),
            retained: total,
        };
    }
    let n = selected.len();
    let (base, base_dust) = split(total.base, n);
    let (quote, quote_dust) = split(total.quote, n);
    Redistribution {
        shares: selected
            .iter()
            .zip(base.into_iter().zip(quote))
            .map(|(&agent, (b, q))| (agent, Inventory::new(b, q)))
            .collect(),
        retained: Inventory::new(base_dust, quote_dust),
    }
}
