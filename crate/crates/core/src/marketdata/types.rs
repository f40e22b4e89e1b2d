use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

/// Maximum number of price levels kept per book side.
pub const MAX_LEVELS: usize = 50;

/// Simulation step: one snapshot and one agent refresh per interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Minute,
    Hour,
}

impl Granularity {
    pub const fn interval_ms(self) -> i64 {
        match self {
            Granularity::Minute => 60_000,
            Granularity::Hour => 3_600_000,
        }
    }

    pub const fn intervals_per_day(self) -> i64 {
        match self {
            Granularity::Minute => 1440,
            Granularity::Hour => 24,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Minute => "minute",
            Granularity::Hour => "hour",
        }
    }

    /// Guesses the granularity from the spacing of snapshot timestamps.
    pub fn infer(timestamps: &[i64]) -> Option<Self> {
        let min_gap = timestamps.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0).min()?;
        [Granularity::Minute, Granularity::Hour]
            .into_iter()
            .find(|g| g.interval_ms() == min_gap)
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minute" | "1m" => Ok(Granularity::Minute),
            "hour" | "1h" => Ok(Granularity::Hour),
            other => Err(format!("unknown granularity `{other}`")),
        }
    }
}

/// Side of the taker that initiated a historical trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggressorSide {
    Buy,
    Sell,
}

impl AggressorSide {
    pub fn as_str(self) -> &'static str {
        match self {
            AggressorSide::Buy => "buy",
            AggressorSide::Sell => "sell",
        }
    }
}

impl FromStr for AggressorSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "buy" => Ok(AggressorSide::Buy),
            "sell" => Ok(AggressorSide::Sell),
            other => Err(format!("unknown trade side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trade {
    /// Milliseconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub price: Decimal,
    pub quantity: Decimal,
    pub aggressor: AggressorSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BookLevel {
    pub price: Decimal,
    pub quantity: Decimal,
}

impl BookLevel {
    pub fn new(price: Decimal, quantity: Decimal) -> Self {
        Self { price, quantity }
    }
}

/// A depth snapshot taken at the start of an interval.
///
/// Bids are sorted best (highest) first, asks best (lowest) first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderBookSnapshot {
    pub timestamp: i64,
    pub bids: Vec<BookLevel>,
    pub asks: Vec<BookLevel>,
}

impl OrderBookSnapshot {
    pub fn best_bid(&self) -> Option<Decimal> {
        self.bids.first().map(|l| l.price)
    }

    pub fn best_ask(&self) -> Option<Decimal> {
        self.asks.first().map(|l| l.price)
    }

    /// Best bid strictly above best ask. A locked book (equal prices) is
    /// accepted and models a zero-spread market.
    pub fn is_crossed(&self) -> bool {
        matches!((self.best_bid(), self.best_ask()), (Some(b), Some(a)) if b > a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candle {
    pub timestamp: i64,
    pub open: Decimal,
    pub high: Decimal,
    pub low: Decimal,
    pub close: Decimal,
    pub volume: Decimal,
}
