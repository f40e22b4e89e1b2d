use std::ops::Range;

use super::types::{Candle, Granularity, OrderBookSnapshot, Trade};
use super::DataError;

/// Time-aligned trades, book snapshots and optional candles at one granularity.
///
/// Immutable once built. Per-snapshot trade ranges are indexed on
/// construction so the replay loop can fetch an interval's trades in O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketDataset {
    granularity: Granularity,
    price_scale: u32,
    snapshots: Vec<OrderBookSnapshot>,
    trades: Vec<Trade>,
    candles: Vec<Candle>,
    trade_ranges: Vec<Range<usize>>,
}

impl MarketDataset {
    /// Builds a dataset; the price precision is the largest scale observed.
    pub fn new(
        granularity: Granularity,
        snapshots: Vec<OrderBookSnapshot>,
        trades: Vec<Trade>,
        candles: Vec<Candle>,
    ) -> Self {
        let price_scale = observed_price_scale(&snapshots, &trades);
        Self::with_price_scale(granularity, price_scale, snapshots, trades, candles)
    }

    pub fn with_price_scale(
        granularity: Granularity,
        price_scale: u32,
        snapshots: Vec<OrderBookSnapshot>,
        trades: Vec<Trade>,
        candles: Vec<Candle>,
    ) -> Self {
        let interval = granularity.interval_ms();
        let trade_ranges = snapshots
            .iter()
            .map(|s| {
                let lo = trades.partition_point(|t| t.timestamp < s.timestamp);
                let hi = trades.partition_point(|t| t.timestamp < s.timestamp + interval);
                lo..hi.max(lo)
            })
            .collect();
        Self {
            granularity,
            price_scale,
            snapshots,
            trades,
            candles,
            trade_ranges,
        }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// Number of fractional digits prices are quoted with.
    pub fn price_scale(&self) -> u32 {
        self.price_scale
    }

    pub fn snapshots(&self) -> &[OrderBookSnapshot] {
        &self.snapshots
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn candles(&self) -> &[Candle] {
        &self.candles
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Trades that print during the interval opened by snapshot `index`.
    pub fn interval_trades(&self, index: usize) -> &[Trade] {
        &self.trades[self.trade_ranges[index].clone()]
    }

    /// Covered half-open span `[first snapshot, last snapshot + interval)`.
    pub fn span(&self) -> Option<(i64, i64)> {
        let first = self.snapshots.first()?.timestamp;
        let last = self.snapshots.last()?.timestamp;
        Some((first, last + self.granularity.interval_ms()))
    }

    /// Index of the snapshot stamped exactly `timestamp`.
    pub fn index_of(&self, timestamp: i64) -> Option<usize> {
        self.snapshots
            .binary_search_by_key(&timestamp, |s| s.timestamp)
            .ok()
    }

    /// True when snapshots `[first, last]` are consecutive intervals.
    pub fn is_contiguous(&self, first: usize, last: usize) -> bool {
        let step = self.granularity.interval_ms();
        self.snapshots[first..=last]
            .windows(2)
            .all(|w| w[1].timestamp - w[0].timestamp == step)
    }

    /// Restricts the dataset to `[t0, t1)`.
    ///
    /// Both bounds must lie on interval boundaries of this dataset and inside
    /// its span.
    pub fn slice(&self, t0: i64, t1: i64) -> Result<MarketDataset, DataError> {
        if t0 >= t1 {
            return Err(DataError::Slice(format!("empty range [{t0}, {t1})")));
        }
        let (start, end) = self
            .span()
            .ok_or_else(|| DataError::Slice("dataset is empty".into()))?;
        let step = self.granularity.interval_ms();
        if (t0 - start) % step != 0 || (t1 - start) % step != 0 {
            return Err(DataError::Slice(format!(
                "bounds [{t0}, {t1}) are not aligned to {} intervals starting at {start}",
                self.granularity
            )));
        }
        if t0 < start || t1 > end {
            return Err(DataError::Slice(format!(
                "range [{t0}, {t1}) outside dataset span [{start}, {end})"
            )));
        }
        let within = |ts: i64| ts >= t0 && ts < t1;
        Ok(MarketDataset::with_price_scale(
            self.granularity,
            self.price_scale,
            self.snapshots.iter().filter(|s| within(s.timestamp)).cloned().collect(),
            self.trades.iter().filter(|t| within(t.timestamp)).cloned().collect(),
            self.candles.iter().filter(|c| within(c.timestamp)).cloned().collect(),
        ))
    }
}

fn observed_price_scale(snapshots: &[OrderBookSnapshot], trades: &[Trade]) -> u32 {
    let book = snapshots
        .iter()
        .flat_map(|s| s.bids.iter().chain(s.asks.iter()))
        .map(|l| l.price.scale());
    let prints = trades.iter().map(|t| t.price.scale());
    book.chain(prints).max().unwrap_or(2)
}

/// Free-function form of [`MarketDataset::slice`].
pub fn slice_dataset(ds: &MarketDataset, t0: i64, t1: i64) -> Result<MarketDataset, DataError> {
    ds.slice(t0, t1)
}
