//! Market-making strategies.
//!
//! Every agent exposes [`Agent::handle_orders`]: given a read-only
//! [`MarketView`] of its own account and the current book, it returns the
//! orders to cancel and place. Four families exist:
//!
//! - **Base**: a single order at a time, alternating bid and ask after each
//!   complete fill, with a cancellation policy (never, always, opposite).
//! - **Skewed**: one bid and one ask at independent spreads, re-quoted on
//!   every refresh.
//! - **PureMm**: one bid and one ask at percentage levels from a fixed level
//!   set, re-quoted on every refresh.
//! - **Hodler**: buys as much base as possible on the first refresh and sells
//!   it all on the last.

mod base;
mod grid;
mod hodler;
mod quoting;

use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exchange::{Account, AgentId, Order, OrderId, Side};
use crate::marketdata::OrderBookSnapshot;

pub use base::{decide_base, BaseState};
pub use grid::{
    enumerate_family, GridSpec, DEFAULT_BASE_SPREADS_PCT, DEFAULT_SKEWED_ASK_PCT, DEFAULT_SKEWED_BID_PCT,
    PUREMM_LEVELS_PCT,
};
pub use hodler::decide_hodler;
pub use quoting::{decide_puremm, decide_skewed};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgentError {
    #[error("duplicate value {value} in {field}")]
    DuplicateGrid { field: &'static str, value: String },
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CancelPolicy {
    Never,
    Always,
    Opposite,
}

impl CancelPolicy {
    pub const ALL: [CancelPolicy; 3] = [CancelPolicy::Never, CancelPolicy::Always, CancelPolicy::Opposite];

    pub fn as_str(self) -> &'static str {
        match self {
            CancelPolicy::Never => "never",
            CancelPolicy::Always => "always",
            CancelPolicy::Opposite => "opposite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Base,
    Skewed,
    PureMm,
    Hodler,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Base => "base",
            Family::Skewed => "skewed",
            Family::PureMm => "puremm",
            Family::Hodler => "hodler",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(Family::Base),
            "skewed" => Ok(Family::Skewed),
            "puremm" => Ok(Family::PureMm),
            "hodler" => Ok(Family::Hodler),
            other => Err(format!("unknown agent family `{other}`")),
        }
    }
}

/// Spreads are fractions of the mid (0.005 = 0.5%).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseConfig {
    pub spread: Decimal,
    pub cancel_policy: CancelPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SkewedConfig {
    pub bid_spread: Decimal,
    pub ask_spread: Decimal,
}

/// Levels are percentages of the mid (0.5 = 0.5%).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PureMmConfig {
    pub bid_level_pct: Decimal,
    pub ask_level_pct: Decimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentConfig {
    Base(BaseConfig),
    Skewed(SkewedConfig),
    PureMm(PureMmConfig),
    Hodler,
}

impl AgentConfig {
    pub fn family(&self) -> Family {
        match self {
            AgentConfig::Base(_) => Family::Base,
            AgentConfig::Skewed(_) => Family::Skewed,
            AgentConfig::PureMm(_) => Family::PureMm,
            AgentConfig::Hodler => Family::Hodler,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let positive = |v: Decimal, what: &str| {
            if v > Decimal::ZERO {
                Ok(())
            } else {
                Err(AgentError::InvalidConfig(format!("{what} must be positive, got {v}")))
            }
        };
        match self {
            AgentConfig::Base(c) => positive(c.spread, "spread"),
            AgentConfig::Skewed(c) => positive(c.bid_spread, "bid spread").and(positive(c.ask_spread, "ask spread")),
            AgentConfig::PureMm(c) => {
                positive(c.bid_level_pct, "bid level").and(positive(c.ask_level_pct, "ask level"))
            }
            AgentConfig::Hodler => Ok(()),
        }
    }

    /// Human-readable identifier, unique within a family grid and CSV-safe.
    pub fn label(&self) -> String {
        let pct = |f: Decimal| (f * Decimal::ONE_HUNDRED).normalize();
        match self {
            AgentConfig::Base(c) => format!("base_{}%_{}", pct(c.spread), c.cancel_policy.as_str()),
            AgentConfig::Skewed(c) => format!("skewed_{}%_{}%", pct(c.bid_spread), pct(c.ask_spread)),
            AgentConfig::PureMm(c) => {
                format!("puremm_{}_{}", c.bid_level_pct.normalize(), c.ask_level_pct.normalize())
            }
            AgentConfig::Hodler => "hodler".to_string(),
        }
    }
}

/// Sizing and price-tick knobs shared by all makers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentParams {
    /// Fraction of the free funding asset committed per order.
    pub order_fraction: Decimal,
    /// Orders with a smaller quote notional are not placed.
    pub min_notional: Decimal,
    /// Placement prices are rounded to this many fractional digits, bids
    /// down and asks up.
    pub price_scale: u32,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            order_fraction: Decimal::ONE,
            min_notional: Decimal::ONE,
            price_scale: 2,
        }
    }
}

/// What an agent sees at a refresh.
#[derive(Debug, Clone, Copy)]
pub struct MarketView<'a> {
    pub snapshot: &'a OrderBookSnapshot,
    pub previous: Option<&'a OrderBookSnapshot>,
    pub time: i64,
    pub is_first_refresh: bool,
    pub is_last_refresh: bool,
    pub account: &'a Account,
    pub open_orders: &'a [Order],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderRequest {
    pub side: Side,
    pub price: Decimal,
    pub quantity: Decimal,
}

/// Orders that execute immediately against the snapshot (hodler only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marketable {
    /// Spend all free quote walking the asks.
    BuyAllQuote,
    /// Sell all free base walking the bids.
    SellAllBase,
}

/// Cancellations are applied first, then marketable orders, then placements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentAction {
    pub cancels: Vec<OrderId>,
    pub placements: Vec<OrderRequest>,
    pub marketable: Vec<Marketable>,
}

impl AgentAction {
    pub fn is_empty(&self) -> bool {
        self.cancels.is_empty() && self.placements.is_empty() && self.marketable.is_empty()
    }
}

/// A strategy instance with its private bookkeeping.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: AgentId,
    pub config: AgentConfig,
    pub params: AgentParams,
    base_state: BaseState,
}

impl Agent {
    pub fn new(id: AgentId, config: AgentConfig, params: AgentParams) -> Self {
        Self {
            id,
            config,
            params,
            base_state: BaseState::default(),
        }
    }

    /// Forgets bookkeeping carried between refreshes.
    pub fn reset(&mut self) {
        self.base_state = BaseState::default();
    }

    pub fn handle_orders(&mut self, view: &MarketView<'_>) -> AgentAction {
        match &self.config {
            AgentConfig::Base(cfg) => decide_base(cfg, &self.params, &mut self.base_state, view),
            AgentConfig::Skewed(cfg) => decide_skewed(cfg, &self.params, view),
            AgentConfig::PureMm(cfg) => decide_puremm(cfg, &self.params, view),
            AgentConfig::Hodler => decide_hodler(view),
        }
    }
}

/// Bid at `mid * (1 - spread)` sized from `quote` available, or `None` when
/// the order would be below the dust threshold.
pub(crate) fn bid_request(mid: Decimal, spread: Decimal, quote: Decimal, params: &AgentParams) -> Option<OrderRequest> {
    use crate::num::{floor_to, ASSET_SCALE};
    let price = floor_to(mid * (Decimal::ONE - spread), params.price_scale);
    if price <= Decimal::ZERO {
        return None;
    }
    let quantity = floor_to(quote * params.order_fraction / price, ASSET_SCALE);
    fundable(Side::Bid, price, quantity, params)
}

/// Ask at `mid * (1 + spread)` sized from `base` available.
pub(crate) fn ask_request(mid: Decimal, spread: Decimal, base: Decimal, params: &AgentParams) -> Option<OrderRequest> {
    use crate::num::{ceil_to, floor_to, ASSET_SCALE};
    let price = ceil_to(mid * (Decimal::ONE + spread), params.price_scale);
    let quantity = floor_to(base * params.order_fraction, ASSET_SCALE);
    fundable(Side::Ask, price, quantity, params)
}

fn fundable(side: Side, price: Decimal, quantity: Decimal, params: &AgentParams) -> Option<OrderRequest> {
    (quantity > Decimal::ZERO && price * quantity >= params.min_notional).then_some(OrderRequest {
        side,
        price,
        quantity,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::marketdata::BookLevel;

    pub fn book(mid_bid: Decimal, mid_ask: Decimal) -> OrderBookSnapshot {
        OrderBookSnapshot {
            timestamp: 0,
            bids: vec![BookLevel::new(mid_bid, Decimal::from(50))],
            asks: vec![BookLevel::new(mid_ask, Decimal::from(50))],
        }
    }

    pub fn view<'a>(snapshot: &'a OrderBookSnapshot, account: &'a Account, orders: &'a [Order]) -> MarketView<'a> {
        MarketView {
            snapshot,
            previous: None,
            time: snapshot.timestamp,
            is_first_refresh: false,
            is_last_refresh: false,
            account,
            open_orders: orders,
        }
    }
}
