//! Seeded generator for regime-labelled synthetic market data.
//!
//! The mid-price path is a straight trend line between the start price and
//! `start_price * (1 + drift)` at the last snapshot, multiplied by
//! `exp(bridge)` where `bridge` is a Gaussian random walk pinned to zero at
//! both ends. Pinning guarantees the realized total drift equals the
//! configured one regardless of the noise draw, so the trend label always
//! holds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rust_decimal::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::MarketDataset;
use super::types::{AggressorSide, BookLevel, Candle, Granularity, OrderBookSnapshot, Trade, MAX_LEVELS};
use super::DataError;
use crate::num::{ceil_to, floor_to, round_half_up, tick, ASSET_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bull,
    Bear,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Volatility {
    Low,
    High,
}

/// Parameters of one synthetic market regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeSpec {
    pub trend: Trend,
    pub volatility: Volatility,
    pub start_price: Decimal,
    /// Number of intervals (snapshots) to generate.
    pub duration: usize,
    pub seed: u64,
    /// Distance of the best bid/ask from the mid, as a fraction of the mid.
    pub half_spread: Decimal,
    /// Quantity resting on every generated level.
    pub level_quantity: Decimal,
    /// Distance between consecutive levels, as a fraction of the mid.
    pub level_step: Decimal,
    pub levels: usize,
    pub trades_per_interval: usize,
    pub trade_qty_min: Decimal,
    pub trade_qty_max: Decimal,
    /// Total fractional price change from the first to the last snapshot.
    /// Defaults to +10% (bull), -20% (bear) or 0 (flat).
    pub drift: Option<Decimal>,
    /// Per-interval log-price standard deviation. Defaults depend on the
    /// volatility label and the granularity; `0` gives a noiseless path.
    pub noise: Option<f64>,
    /// Timestamp of the first snapshot, ms UTC.
    pub start_ms: i64,
    pub price_scale: u32,
}

impl Default for RegimeSpec {
    fn default() -> Self {
        Self {
            trend: Trend::Flat,
            volatility: Volatility::Low,
            start_price: Decimal::from(30_000),
            duration: 1440,
            seed: 0,
            half_spread: Decimal::new(1, 4),
            level_quantity: Decimal::new(1, 2),
            level_step: Decimal::new(1, 4),
            levels: MAX_LEVELS,
            trades_per_interval: 10,
            trade_qty_min: Decimal::new(1, 2),
            trade_qty_max: Decimal::new(2, 1),
            drift: None,
            noise: None,
            // 2020-10-01T00:00:00Z
            start_ms: 1_601_510_400_000,
            price_scale: 2,
        }
    }
}

impl RegimeSpec {
    pub fn total_drift(&self) -> Decimal {
        self.drift.unwrap_or(match self.trend {
            Trend::Bull => Decimal::new(10, 2),
            Trend::Bear => Decimal::new(-20, 2),
            Trend::Flat => Decimal::ZERO,
        })
    }

    pub fn sigma(&self, granularity: Granularity) -> f64 {
        self.noise.unwrap_or(match (self.volatility, granularity) {
            (Volatility::Low, Granularity::Minute) => 0.0004,
            (Volatility::High, Granularity::Minute) => 0.0012,
            (Volatility::Low, Granularity::Hour) => 0.003,
            (Volatility::High, Granularity::Hour) => 0.009,
        })
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |m: &str| Err(DataError::Regime(m.to_string()));
        let drift = self.total_drift();
        if self.duration == 0 {
            return fail("duration must be at least one interval");
        }
        if self.start_price <= Decimal::ZERO {
            return fail("start_price must be positive");
        }
        if self.half_spread < Decimal::ZERO || self.level_step <= Decimal::ZERO {
            return fail("half_spread must be >= 0 and level_step > 0");
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return fail("levels must be in 1..=50");
        }
        if self.level_quantity <= Decimal::ZERO {
            return fail("level_quantity must be positive");
        }
        if self.trade_qty_min <= Decimal::ZERO || self.trade_qty_min > self.trade_qty_max {
            return fail("trade quantity range must satisfy 0 < min <= max");
        }
        if self.price_scale > 8 {
            return fail("price_scale must be at most 8");
        }
        if drift <= Decimal::NEGATIVE_ONE {
            return fail("drift must be greater than -1");
        }
        if self.noise.is_some_and(|s| !s.is_finite() || s < 0.0) {
            return fail("noise must be a finite non-negative number");
        }
        let consistent = match self.trend {
            Trend::Bull => drift > Decimal::ZERO,
            Trend::Bear => drift < Decimal::ZERO,
            Trend::Flat => drift.abs() <= Decimal::new(1, 2),
        };
        if !consistent {
            return fail("drift sign contradicts the trend label");
        }
        Ok(())
    }
}

/// Generates a dataset that is a pure function of `(spec, granularity)`.
pub fn generate_synthetic(spec: &RegimeSpec, granularity: Granularity) -> Result<MarketDataset, DataError> {
    spec.validate()?;
    let n = spec.duration;
    let scale = spec.price_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mids = mid_path(spec, granularity, &mut rng);

    let step_ms = granularity.interval_ms();
    let per = spec.trades_per_interval;
    let qty_lo = (spec.trade_qty_min * Decimal::from(100_000_000)).trunc().to_i64().unwrap_or(1).max(1);
    let qty_hi = (spec.trade_qty_max * Decimal::from(100_000_000)).trunc().to_i64().unwrap_or(qty_lo).max(qty_lo);

    let mut snapshots = Vec::with_capacity(n);
    let mut trades = Vec::with_capacity(n * per);
    let mut candles = Vec::with_capacity(n);
    for j in 0..n {
        let ts = spec.start_ms + j as i64 * step_ms;
        let (from, to) = (mids[j], mids[j + 1]);
        snapshots.push(book_around(spec, ts, from));

        let mut high = from;
        let mut low = from;
        let mut close = from;
        let mut volume = Decimal::ZERO;
        for k in 0..per {
            let progress = Decimal::from(k + 1) / Decimal::from(per);
            let price = round_half_up(from + (to - from) * progress, scale).max(tick(scale));
            let aggressor = match to.cmp(&from) {
                std::cmp::Ordering::Greater => AggressorSide::Buy,
                std::cmp::Ordering::Less => AggressorSide::Sell,
                std::cmp::Ordering::Equal if k % 2 == 0 => AggressorSide::Buy,
                std::cmp::Ordering::Equal => AggressorSide::Sell,
            };
            let quantity = Decimal::new(rng.random_range(qty_lo..=qty_hi), ASSET_SCALE);
            trades.push(Trade {
                timestamp: ts + k as i64 * (step_ms / per as i64),
                price,
                quantity,
                aggressor,
            });
            high = high.max(price);
            low = low.min(price);
            close = price;
            volume += quantity;
        }
        candles.push(Candle {
            timestamp: ts,
            open: from,
            high,
            low,
            close,
            volume,
        });
    }
    Ok(MarketDataset::with_price_scale(granularity, scale, snapshots, trades, candles))
}

/// `duration + 1` mids: one per snapshot plus the close of the last interval.
fn mid_path(spec: &RegimeSpec, granularity: Granularity, rng: &mut ChaCha8Rng) -> Vec<Decimal> {
    let n = spec.duration;
    let sigma = spec.sigma(granularity);
    let mut walk = Vec::with_capacity(n + 1);
    walk.push(0.0f64);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        walk.push(walk.last().copied().unwrap_or(0.0) + sigma * z);
    }
    // The drift is pinned at the last snapshot (index n - 1).
    let pin = if n >= 2 { n - 1 } else { 1 };
    let drift = spec.total_drift();
    let floor = tick(spec.price_scale);
    (0..=n)
        .map(|j| {
            let frac = j as f64 / pin as f64;
            let bridge = walk[j] - frac * walk[pin];
            let noise = if bridge == 0.0 {
                Decimal::ONE
            } else {
                Decimal::from_f64(bridge.exp()).unwrap_or(Decimal::ONE)
            };
            let line = Decimal::ONE + drift * Decimal::from(j) / Decimal::from(pin);
            round_half_up(spec.start_price * line * noise, spec.price_scale).max(floor)
        })
        .collect()
}

fn book_around(spec: &RegimeSpec, timestamp: i64, mid: Decimal) -> OrderBookSnapshot {
    let scale = spec.price_scale;
    let t = tick(scale);
    let mut bids: Vec<BookLevel> = Vec::with_capacity(spec.levels);
    let mut asks: Vec<BookLevel> = Vec::with_capacity(spec.levels);
    for k in 0..spec.levels {
        let offset = spec.half_spread + spec.level_step * Decimal::from(k);
        let mut bid = floor_to(mid * (Decimal::ONE - offset), scale);
        if let Some(prev) = bids.last() {
            bid = bid.min(prev.price - t);
        }
        if bid > Decimal::ZERO {
            bids.push(BookLevel::new(bid, spec.level_quantity));
        }
        let mut ask = ceil_to(mid * (Decimal::ONE + offset), scale);
        if let Some(prev) = asks.last() {
            ask = ask.max(prev.price + t);
        }
        asks.push(BookLevel::new(ask, spec.level_quantity));
    }
    OrderBookSnapshot {
        timestamp,
        bids,
        asks,
    }
}
