use rust_decimal::Decimal;

use super::{ask_request, bid_request, AgentAction, AgentParams, BaseConfig, CancelPolicy, MarketView, OrderRequest};
use crate::exchange::{mid_price, Side};

/// Bookkeeping of a Base agent between refreshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseState {
    /// Side the next order goes on. Starts on the bid.
    pub side: Side,
    /// An order placed by this agent is believed to be resting.
    pub has_order: bool,
    pub last_mid: Option<Decimal>,
    /// Sign of the last non-zero mid move; 0 until one has been seen.
    pub last_direction: i8,
}

impl Default for BaseState {
    fn default() -> Self {
        Self {
            side: Side::Bid,
            has_order: false,
            last_mid: None,
            last_direction: 0,
        }
    }
}

impl BaseState {
    /// Records `mid` and reports whether the price move changed direction.
    fn observe(&mut self, mid: Decimal) -> bool {
        let direction = match self.last_mid {
            Some(prev) if mid > prev => 1,
            Some(prev) if mid < prev => -1,
            _ => 0,
        };
        self.last_mid = Some(mid);
        if direction == 0 {
            return false;
        }
        let reversed = self.last_direction != 0 && direction != self.last_direction;
        self.last_direction = direction;
        reversed
    }
}

/// One order at a time, ping-ponging between bid and ask after each
/// complete fill.
pub fn decide_base(cfg: &BaseConfig, params: &AgentParams, state: &mut BaseState, view: &MarketView<'_>) -> AgentAction {
    let mut action = AgentAction::default();
    let Ok(mid) = mid_price(view.snapshot) else {
        return action;
    };
    let reversed = state.observe(mid);

    let resting = view.open_orders.first();
    if state.has_order && resting.is_none() {
        // The order left the book without us cancelling it: filled.
        state.side = state.side.opposite();
    }
    state.has_order = resting.is_some();

    let mut quote = view.account.quote_free;
    let mut base = view.account.base_free;
    if let Some(order) = resting {
        let cancel = match cfg.cancel_policy {
            CancelPolicy::Never => false,
            CancelPolicy::Always => true,
            CancelPolicy::Opposite => reversed,
        };
        if !cancel {
            return action;
        }
        action.cancels.push(order.id);
        match order.side {
            Side::Bid => quote += order.price * order.remaining(),
            Side::Ask => base += order.remaining(),
        }
        state.has_order = false;
    }

    let request = |side: Side| -> Option<OrderRequest> {
        match side {
            Side::Bid => bid_request(mid, cfg.spread, quote, params),
            Side::Ask => ask_request(mid, cfg.spread, base, params),
        }
    };
    let placement = match request(state.side) {
        Some(r) => Some(r),
        None => {
            // Nothing left to fund this side (e.g. after a partial fill and
            // cancel); continue from the other side.
            let other = request(state.side.opposite());
            if other.is_some() {
                state.side = state.side.opposite();
            }
            other
        }
    };
    if let Some(p) = placement {
        action.placements.push(p);
        state.has_order = true;
    }
    action
}
