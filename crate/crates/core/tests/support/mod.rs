#![allow(dead_code)]

use amsa_core::marketdata::{AggressorSide, BookLevel, Granularity, MarketDataset, OrderBookSnapshot, Trade};
use rust_decimal::Decimal;

pub const T0: i64 = 1_599_998_400_000;

/// A zero-spread book: best bid and best ask both at `mid`, then two more
/// levels one cent apart on each side, every level `depth` deep.
pub fn locked_book(timestamp: i64, mid: Decimal, depth: Decimal) -> OrderBookSnapshot {
    let step = Decimal::new(1, 2);
    OrderBookSnapshot {
        timestamp,
        bids: (0..3)
            .map(|k| BookLevel::new(mid - step * Decimal::from(k), depth))
            .collect(),
        asks: (0..3)
            .map(|k| BookLevel::new(mid + step * Decimal::from(k), depth))
            .collect(),
    }
}

/// One locked-book snapshot per price, no trades.
pub fn path_dataset(granularity: Granularity, prices: &[Decimal], depth: Decimal) -> MarketDataset {
    let step = granularity.interval_ms();
    let snaps = prices
        .iter()
        .enumerate()
        .map(|(i, p)| locked_book(T0 + i as i64 * step, *p, depth))
        .collect();
    MarketDataset::with_price_scale(granularity, 2, snaps, Vec::new(), Vec::new())
}

/// `warmup` intervals at `from`, then a straight line from `from` to `to`
/// over `run` intervals (the last snapshot sits exactly at `to`).
pub fn ramp(warmup: usize, run: usize, from: Decimal, to: Decimal) -> Vec<Decimal> {
    let mut v = vec![from; warmup];
    for j in 0..run {
        let frac = Decimal::from(j) / Decimal::from(run - 1);
        v.push((from + (to - from) * frac).round_dp(2));
    }
    v
}

pub fn trade(timestamp: i64, price: Decimal, quantity: Decimal, aggressor: AggressorSide) -> Trade {
    Trade {
        timestamp,
        price,
        quantity,
        aggressor,
    }
}

pub fn day_ms(granularity: Granularity) -> i64 {
    granularity.intervals_per_day() * granularity.interval_ms()
}
