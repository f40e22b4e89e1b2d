#![allow(dead_code)]

pub mod oracle;

use amsa_core::marketdata::{BookLevel, Granularity, MarketDataset, OrderBookSnapshot};
use amsa_core::Decimal;

pub const T0: i64 = 1_599_998_400_000;

pub fn day_ms(g: Granularity) -> i64 {
    g.intervals_per_day() * g.interval_ms()
}

/// Zero-spread book: best bid and ask both at `mid`, two more levels a
/// cent apart on each side, every level `depth` deep.
pub fn locked_book(timestamp: i64, mid: Decimal, depth: Decimal) -> OrderBookSnapshot {
    let cent = Decimal::new(1, 2);
    let side = |sign: i64| (0..3).map(|k| BookLevel::new(mid + cent * Decimal::from(sign * k), depth)).collect();
    OrderBookSnapshot {
        timestamp,
        bids: side(-1),
        asks: side(1),
    }
}

/// One locked snapshot per price starting at `T0`, no trades.
pub fn path_dataset(g: Granularity, prices: &[Decimal], depth: Decimal) -> MarketDataset {
    let snaps = prices
        .iter()
        .enumerate()
        .map(|(i, p)| locked_book(T0 + i as i64 * g.interval_ms(), *p, depth))
        .collect();
    MarketDataset::with_price_scale(g, 2, snaps, Vec::new(), Vec::new())
}

/// `flat` intervals at `from`, then a straight line to `to` over `run`
/// intervals whose last point is exactly `to`.
pub fn ramp(flat: usize, run: usize, from: Decimal, to: Decimal) -> Vec<Decimal> {
    let mut v = vec![from; flat];
    let steps = Decimal::from(run - 1);
    v.extend((0..run).map(|j| (from + (to - from) * Decimal::from(j) / steps).round_dp(2)));
    v
}
