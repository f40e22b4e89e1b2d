use std::fmt;

use rust_decimal::Decimal;

use super::dataset::MarketDataset;
use super::types::MAX_LEVELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyDataset,
    Gap,
    Misaligned,
    SnapshotOrder,
    TooManyLevels,
    NonPositiveLevel,
    BidsNotDescending,
    AsksNotAscending,
    CrossedBook,
    NonPositiveTrade,
    TradeOrder,
    TradeOutsideSpan,
    CandleRange,
    NonPositiveCandle,
    NegativeVolume,
    CandleOrder,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptyDataset => "empty dataset",
            Rule::Gap => "gap",
            Rule::Misaligned => "misaligned snapshot",
            Rule::SnapshotOrder => "snapshot timestamps not increasing",
            Rule::TooManyLevels => "more than 50 levels",
            Rule::NonPositiveLevel => "non-positive level",
            Rule::BidsNotDescending => "bids not strictly descending",
            Rule::AsksNotAscending => "asks not strictly ascending",
            Rule::CrossedBook => "crossed book",
            Rule::NonPositiveTrade => "non-positive trade",
            Rule::TradeOrder => "trade timestamps decreasing",
            Rule::TradeOutsideSpan => "trade outside span",
            Rule::CandleRange => "candle low/high inconsistent",
            Rule::NonPositiveCandle => "non-positive candle price",
            Rule::NegativeVolume => "negative candle volume",
            Rule::CandleOrder => "candle timestamps not increasing",
        }
    }
}

/// One violated invariant. `interval` is counted from the first snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule: Rule,
    pub interval: Option<i64>,
    pub timestamp: Option<i64>,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule.as_str())?;
        if let Some(i) = self.interval {
            write!(f, " at interval {i}")?;
        }
        if let Some(ts) = self.timestamp {
            write!(f, " (timestamp {ts})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return writeln!(f, "ok: no findings");
        }
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Checks every dataset invariant and reports violations as data.
pub fn validate_dataset(ds: &MarketDataset) -> ValidationReport {
    let mut findings = Vec::new();
    let Some((start, end)) = ds.span() else {
        findings.push(Finding {
            rule: Rule::EmptyDataset,
            interval: None,
            timestamp: None,
        });
        return ValidationReport { findings };
    };
    let step = ds.granularity().interval_ms();
    let interval_of = |ts: i64| (ts - start).div_euclid(step);
    let mut push = |rule, ts: i64, with_interval: bool| {
        findings.push(Finding {
            rule,
            interval: with_interval.then(|| interval_of(ts)),
            timestamp: Some(ts),
        })
    };

    let snapshots = ds.snapshots();
    for (i, s) in snapshots.iter().enumerate() {
        let ts = s.timestamp;
        if ts.rem_euclid(step) != 0 {
            push(Rule::Misaligned, ts, true);
        }
        if i > 0 {
            let prev = snapshots[i - 1].timestamp;
            if ts <= prev {
                push(Rule::SnapshotOrder, ts, true);
            } else {
                let mut missing = prev + step;
                while missing < ts {
                    push(Rule::Gap, missing, true);
                    missing += step;
                }
            }
        }
        if s.bids.len() > MAX_LEVELS || s.asks.len() > MAX_LEVELS {
            push(Rule::TooManyLevels, ts, true);
        }
        let levels = s.bids.iter().chain(s.asks.iter());
        if levels.into_iter().any(|l| l.price <= Decimal::ZERO || l.quantity <= Decimal::ZERO) {
            push(Rule::NonPositiveLevel, ts, true);
        }
        if s.bids.windows(2).any(|w| w[1].price >= w[0].price) {
            push(Rule::BidsNotDescending, ts, true);
        }
        if s.asks.windows(2).any(|w| w[1].price <= w[0].price) {
            push(Rule::AsksNotAscending, ts, true);
        }
        if s.is_crossed() {
            push(Rule::CrossedBook, ts, true);
        }
    }

    let trades = ds.trades();
    for (i, t) in trades.iter().enumerate() {
        let inside = t.timestamp >= start && t.timestamp < end;
        if t.price <= Decimal::ZERO || t.quantity <= Decimal::ZERO {
            push(Rule::NonPositiveTrade, t.timestamp, inside);
        }
        if i > 0 && t.timestamp < trades[i - 1].timestamp {
            push(Rule::TradeOrder, t.timestamp, inside);
        }
        if !inside {
            push(Rule::TradeOutsideSpan, t.timestamp, false);
        }
    }

    let candles = ds.candles();
    for (i, c) in candles.iter().enumerate() {
        let inside = c.timestamp >= start && c.timestamp < end;
        if [c.open, c.high, c.low, c.close].iter().any(|p| *p <= Decimal::ZERO) {
            push(Rule::NonPositiveCandle, c.timestamp, inside);
        }
        let body_lo = c.open.min(c.close);
        let body_hi = c.open.max(c.close);
        if c.low > body_lo || c.high < body_hi || c.low > c.high {
            push(Rule::CandleRange, c.timestamp, inside);
        }
        if c.volume < Decimal::ZERO {
            push(Rule::NegativeVolume, c.timestamp, inside);
        }
        if i > 0 && c.timestamp <= candles[i - 1].timestamp {
            push(Rule::CandleOrder, c.timestamp, inside);
        }
    }

    ValidationReport { findings }
}
