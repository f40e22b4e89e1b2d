//! The simulated exchange.
//!
//! Agents place limit orders into a [`SimEnvironment`]; funds backing an open
//! order move from the free to the locked balance. Each interval the
//! environment replays the historical trades of that interval against a
//! working copy of the historical snapshot plus the agent's injected orders,
//! so a trade either executes against historical liquidity or is intercepted
//! by an injected order. Every agent is matched against its own pristine copy
//! of the book: agents never compete for the same fill.

mod env;
mod matching;

use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::OrderBookSnapshot;

pub use env::{SimEnvironment, StepReport};
pub use matching::{match_trade, walk_asks, walk_bids, BookCursor, BookWalk, WorkingBook};

/// Stable agent identifier; lower ids win ties in deterministic orderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type OrderId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderStatus {
    Open,
    Filled,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub price: Decimal,
    pub quantity: Decimal,
    pub filled: Decimal,
    pub status: OrderStatus,
}

impl Order {
    pub fn remaining(&self) -> Decimal {
        self.quantity - self.filled
    }

    pub fn is_open(&self) -> bool {
        self.status == OrderStatus::Open
    }
}

/// Balances of one agent. Locked amounts back the agent's open orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Account {
    pub agent: AgentId,
    pub base_free: Decimal,
    pub base_locked: Decimal,
    pub quote_free: Decimal,
    pub quote_locked: Decimal,
}

impl Account {
    pub fn new(agent: AgentId, base: Decimal, quote: Decimal) -> Self {
        Self {
            agent,
            base_free: base,
            base_locked: Decimal::ZERO,
            quote_free: quote,
            quote_locked: Decimal::ZERO,
        }
    }

    pub fn base_total(&self) -> Decimal {
        self.base_free + self.base_locked
    }

    pub fn quote_total(&self) -> Decimal {
        self.quote_free + self.quote_locked
    }
}

/// An execution of an injected (or marketable) order.
///
/// `price` is the order's limit price (for marketable orders, the price of
/// the level walked). `fee` is charged in the asset the owner receives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fill {
    pub order_id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub timestamp: i64,
    pub price: Decimal,
    pub quantity: Decimal,
    pub fee: Decimal,
}

impl Fill {
    /// Signed change of the owner's base holdings.
    pub fn base_delta(&self) -> Decimal {
        match self.side {
            Side::Bid => self.quantity - self.fee,
            Side::Ask => -self.quantity,
        }
    }

    /// Signed change of the owner's quote holdings.
    pub fn quote_delta(&self) -> Decimal {
        match self.side {
            Side::Bid => -(self.price * self.quantity),
            Side::Ask => self.price * self.quantity - self.fee,
        }
    }
}

/// Priority between historical and injected liquidity at the same price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMode {
    #[default]
    HistoricalFirst,
    InjectedFirst,
}

/// Whether a trade printing exactly at an injected order's price fills it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillTrigger {
    #[default]
    StrictCross,
    Touch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchRules {
    pub mode: MatchingMode,
    pub trigger: FillTrigger,
    pub fee_rate: Decimal,
}

impl Default for MatchRules {
    fn default() -> Self {
        Self {
            mode: MatchingMode::HistoricalFirst,
            trigger: FillTrigger::StrictCross,
            // 0.1%
            fee_rate: Decimal::new(1, 3),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("agent {agent}: insufficient funds (needs {needed}, has {available})")]
    InsufficientFunds {
        agent: AgentId,
        needed: Decimal,
        available: Decimal,
    },
    #[error("order price and quantity must be positive (price {price}, quantity {quantity})")]
    NonPositive { price: Decimal, quantity: Decimal },
    #[error("unknown order {0}")]
    UnknownOrder(OrderId),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("agent {0} already has an account")]
    DuplicateAgent(AgentId),
    #[error("agent {0} still has open orders")]
    OpenOrders(AgentId),
    #[error("book at {timestamp} has no {side} levels")]
    EmptySide { timestamp: i64, side: &'static str },
}

/// Average of the best bid and best ask.
pub fn mid_price(snapshot: &OrderBookSnapshot) -> Result<Decimal, SimError> {
    let empty = |side| SimError::EmptySide {
        timestamp: snapshot.timestamp,
        side,
    };
    let bid = snapshot.best_bid().ok_or_else(|| empty("bid"))?;
    let ask = snapshot.best_ask().ok_or_else(|| empty("ask"))?;
    Ok((bid + ask) / Decimal::TWO)
}

/// Mark-to-market value in quote units, locked funds included.
pub fn account_value(account: &Account, snapshot: &OrderBookSnapshot) -> Result<Decimal, SimError> {
    let mid = mid_price(snapshot)?;
    Ok(account.base_total() * mid + account.quote_total())
}
