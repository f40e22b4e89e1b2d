//! Return metrics, the buy-and-hold reference and result tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rust_decimal::Decimal;
use thiserror::Error;

use crate::agents::Family;
use crate::exchange::{mid_price, walk_asks, walk_bids, SimError};
use crate::marketdata::{Granularity, MarketDataset, OrderBookSnapshot};
use crate::num::fmt_fixed;

/// Fractional digits of percentages written to result tables.
pub const REPORT_SCALE: u32 = 2;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("start value must be positive, got {0}")]
    NonPositiveStart(Decimal),
    #[error("hodler reference needs a non-empty dataset")]
    EmptySlice,
    #[error("book at {timestamp} is too shallow on the {side} side for the hodler {action}")]
    InsufficientDepth {
        timestamp: i64,
        side: &'static str,
        action: &'static str,
    },
    #[error(transparent)]
    Valuation(#[from] SimError),
    #[error("missing result cells: {}", .0.join(", "))]
    MissingCells(Vec<String>),
    #[error("duplicate result cell {0}")]
    DuplicateCell(String),
    #[error("unexpected result cell {0}")]
    UnexpectedCell(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Percentage return from `start` to `end`.
pub fn compute_roi(start_value: Decimal, end_value: Decimal) -> Result<Decimal, MetricsError> {
    if start_value <= Decimal::ZERO {
        return Err(MetricsError::NonPositiveStart(start_value));
    }
    Ok(Decimal::ONE_HUNDRED * (end_value - start_value) / start_value)
}

/// Excess return over the buy-and-hold baseline, in percentage points.
pub fn compute_alpha(agent_roi_pct: Decimal, hodler_roi_pct: Decimal) -> Decimal {
    agent_roi_pct - hodler_roi_pct
}

/// Start and end value of a buy-and-hold round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HodlerOutcome {
    pub start_value: Decimal,
    pub end_value: Decimal,
    pub roi_pct: Decimal,
}

/// Buys base with all quote walking `first`'s asks, then sells all base
/// walking `last`'s bids, paying `fee_rate` in the received asset on every
/// execution. The start value is marked at `first`'s mid.
pub fn hodler_round_trip(
    first: &OrderBookSnapshot,
    last: &OrderBookSnapshot,
    base: Decimal,
    quote: Decimal,
    fee_rate: Decimal,
) -> Result<HodlerOutcome, MetricsError> {
    let start_value = base * mid_price(first)? + quote;
    let mut base = base;
    let mut quote = quote;

    if quote > Decimal::ZERO {
        let buy = walk_asks(&first.asks, quote);
        if buy.exhausted {
            return Err(MetricsError::InsufficientDepth {
                timestamp: first.timestamp,
                side: "ask",
                action: "buy",
            });
        }
        for (price, qty) in buy.executions {
            base += qty - fee_rate * qty;
            quote -= price * qty;
        }
    }
    if base > Decimal::ZERO {
        let sell = walk_bids(&last.bids, base);
        if sell.exhausted {
            return Err(MetricsError::InsufficientDepth {
                timestamp: last.timestamp,
                side: "bid",
                action: "sell",
            });
        }
        for (price, qty) in sell.executions {
            base -= qty;
            quote += price * qty - fee_rate * price * qty;
        }
    }
    let end_value = quote + base * mid_price(last)?;
    Ok(HodlerOutcome {
        start_value,
        end_value,
        roi_pct: compute_roi(start_value, end_value)?,
    })
}

/// ROI of the buy-and-hold baseline over the whole of `ds`.
pub fn hodler_reference(ds: &MarketDataset, initial: (Decimal, Decimal), fee_rate: Decimal) -> Result<Decimal, MetricsError> {
    let snaps = ds.snapshots();
    let (first, last) = match (snaps.first(), snaps.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(MetricsError::EmptySlice),
    };
    Ok(hodler_round_trip(first, last, initial.0, initial.1, fee_rate)?.roi_pct)
}

/// One cell of the result matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub market: String,
    pub family: Family,
    pub period_days: u32,
    pub granularity: Granularity,
    pub roi_pct: Decimal,
    pub alpha_pct: Decimal,
}

impl ReportRow {
    /// ROI of the buy-and-hold baseline the alpha was measured against.
    pub fn hodler_roi_pct(&self) -> Decimal {
        self.roi_pct - self.alpha_pct
    }

    fn key(&self) -> CellKey {
        CellKey {
            market: self.market.clone(),
            family: self.family,
            period_days: self.period_days,
            granularity: self.granularity,
        }
    }
}

/// Identifies a cell: (market, family, period, granularity).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub market: String,
    pub family: Family,
    pub period_days: u32,
    pub granularity: Granularity,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}d/{}", self.market, self.family, self.period_days, self.granularity)
    }
}

/// Orders result rows by (market, family, period, granularity) and checks
/// them against the expected cell set when one is given.
pub fn emit_report(rows: Vec<ReportRow>, expected: Option<&[CellKey]>) -> Result<Vec<ReportRow>, MetricsError> {
    let mut by_key = BTreeMap::new();
    for row in rows {
        let key = row.key();
        if by_key.contains_key(&key) {
            return Err(MetricsError::DuplicateCell(key.to_string()));
        }
        by_key.insert(key, row);
    }
    if let Some(expected) = expected {
        let wanted: BTreeSet<&CellKey> = expected.iter().collect();
        let missing: Vec<String> = wanted
            .iter()
            .filter(|k| !by_key.contains_key(**k))
            .map(|k| k.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(MetricsError::MissingCells(missing));
        }
        if let Some(extra) = by_key.keys().find(|k| !wanted.contains(k)) {
            return Err(MetricsError::UnexpectedCell(extra.to_string()));
        }
    }
    Ok(by_key.into_values().collect())
}

pub const RESULTS_HEADER: &str = "market,family,period_days,granularity,roi_pct,alpha_pct";

/// Writes `results.csv` rows in the given order.
pub fn write_results_csv<W: Write>(rows: &[ReportRow], mut out: W) -> Result<(), MetricsError> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.market,
            r.family,
            r.period_days,
            r.granularity,
            fmt_fixed(r.roi_pct, REPORT_SCALE),
            fmt_fixed(r.alpha_pct, REPORT_SCALE)
        )?;
    }
    Ok(())
}

/// A plot-ready table for one (market, granularity): one line per period,
/// one ROI column per family plus the hodler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureTable {
    pub market: String,
    pub granularity: Granularity,
    pub families: Vec<Family>,
    /// `(period_days, ROI per family in `families` order, hodler ROI)`.
    pub lines: Vec<(u32, Vec<Option<Decimal>>, Decimal)>,
}

impl FigureTable {
    pub fn file_name(&self) -> String {
        format!("figure_{}_{}.csv", self.market, self.granularity)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), MetricsError> {
        let mut header = String::from("period_days");
        for f in &self.families {
            header.push(',');
            header.push_str(f.as_str());
        }
        header.push_str(",hodler");
        writeln!(out, "{header}")?;
        for (period, rois, hodler) in &self.lines {
            let mut line = period.to_string();
            for roi in rois {
                line.push(',');
                if let Some(v) = roi {
                    line.push_str(&fmt_fixed(*v, REPORT_SCALE));
                }
            }
            line.push(',');
            line.push_str(&fmt_fixed(*hodler, REPORT_SCALE));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Groups ordered report rows into per-(market, granularity) tables.
pub fn figure_tables(rows: &[ReportRow]) -> Vec<FigureTable> {
    let mut groups: BTreeMap<(String, Granularity), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.market.clone(), r.granularity)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((market, granularity), rows)| {
            let families: Vec<Family> = rows.iter().map(|r| r.family).collect::<BTreeSet<_>>().into_iter().collect();
            let periods: BTreeSet<u32> = rows.iter().map(|r| r.period_days).collect();
            let lines = periods
                .into_iter()
                .map(|p| {
                    let at_period: Vec<&&ReportRow> = rows.iter().filter(|r| r.period_days == p).collect();
                    let rois = families
                        .iter()
                        .map(|f| at_period.iter().find(|r| r.family == *f).map(|r| r.roi_pct))
                        .collect();
                    let hodler = at_period[0].hodler_roi_pct();
                    (p, rois, hodler)
                })
                .collect();
            FigureTable {
                market,
                granularity,
                families,
                lines,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::BookLevel;
    use rust_decimal_macros::dec;

    fn flat(ts: i64, price: Decimal, depth: Decimal) -> OrderBookSnapshot {
        OrderBookSnapshot {
            timestamp: ts,
            bids: vec![BookLevel::new(price, depth)],
            asks: vec![BookLevel::new(price, depth)],
        }
    }

    #[test]
    fn roi_examples() {
        assert_eq!(compute_roi(dec!(1000), dec!(1100)).unwrap(), dec!(10));
        assert_eq!(compute_roi(dec!(1000), dec!(1000)).unwrap(), dec!(0));
        assert_eq!(compute_roi(dec!(2000), dec!(1618)).unwrap(), dec!(-19.1));
        assert!(compute_roi(dec!(0), dec!(1)).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(compute_alpha(dec!(12.55), dec!(12.90)), dec!(-0.35));
        assert_eq!(compute_alpha(dec!(6.79), dec!(-19.10)), dec!(25.89));
        assert_eq!(compute_alpha(dec!(3.3), dec!(3.3)), dec!(0));
    }

    #[test]
    fn hodler_zero_fee_paths() {
        let up = hodler_round_trip(&flat(0, dec!(100), dec!(1000)), &flat(1, dec!(110), dec!(1000)), dec!(0.1), dec!(10), dec!(0))
            .unwrap();
        assert_eq!(up.roi_pct, dec!(10));
        let down =
            hodler_round_trip(&flat(0, dec!(100), dec!(1000)), &flat(1, dec!(80.9), dec!(1000)), dec!(0.1), dec!(10), dec!(0))
                .unwrap();
        assert_eq!(down.roi_pct, dec!(-19.1));
    }

    #[test]
    fn hodler_with_fees_matches_hand_ledger() {
        // buy 0.1 @100 for 10 quote, receive 0.0999 after fee: 0.1999 base
        // sell 0.1999 @110 = 21.989, minus 0.021989 fee = 21.967011
        // ROI = 100 * (21.967011 - 20) / 20 = 9.835055
        let out = hodler_round_trip(&flat(0, dec!(100), dec!(1000)), &flat(1, dec!(110), dec!(1000)), dec!(0.1), dec!(10), dec!(0.001))
            .unwrap();
        assert_eq!(out.end_value, dec!(21.967011));
        assert_eq!(out.roi_pct, dec!(9.835055));
    }

    #[test]
    fn hodler_shallow_book_is_an_error() {
        let err = hodler_round_trip(&flat(7, dec!(100), dec!(0.05)), &flat(8, dec!(100), dec!(1)), dec!(0), dec!(10), dec!(0))
            .unwrap_err();
        assert!(matches!(err, MetricsError::InsufficientDepth { timestamp: 7, .. }));
    }

    fn row(market: &str, family: Family, period: u32, roi: Decimal) -> ReportRow {
        ReportRow {
            market: market.into(),
            family,
            period_days: period,
            granularity: Granularity::Minute,
            roi_pct: roi,
            alpha_pct: roi - dec!(1),
        }
    }

    #[test]
    fn report_is_order_insensitive() {
        let rows = vec![
            row("bear", Family::Skewed, 2, dec!(1)),
            row("bull", Family::Base, 1, dec!(2)),
            row("bear", Family::Base, 5, dec!(3)),
        ];
        let mut reversed = rows.clone();
        reversed.reverse();
        let render = |rows: Vec<ReportRow>| {
            let mut buf = Vec::new();
            write_results_csv(&emit_report(rows, None).unwrap(), &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render(rows);
        assert_eq!(a, render(reversed));
        assert_eq!(
            a,
            "market,family,period_days,granularity,roi_pct,alpha_pct\n\
             bear,base,5,minute,3.00,2.00\n\
             bear,skewed,2,minute,1.00,0.00\n\
             bull,base,1,minute,2.00,1.00\n"
        );
    }

    #[test]
    fn report_flags_missing_and_duplicate_cells() {
        let rows = vec![row("bear", Family::Base, 1, dec!(1))];
        let want = [
            rows[0].key(),
            CellKey {
                market: "bull".into(),
                family: Family::Base,
                period_days: 1,
                granularity: Granularity::Minute,
            },
        ];
        let err = emit_report(rows.clone(), Some(&want)).unwrap_err();
        assert_eq!(err.to_string(), "missing result cells: bull/base/1d/minute");
        let dup = vec![rows[0].clone(), rows[0].clone()];
        assert!(matches!(emit_report(dup, None), Err(MetricsError::DuplicateCell(_))));
    }

    #[test]
    fn figure_table_layout() {
        let rows = emit_report(
            vec![
                row("bear", Family::Base, 1, dec!(1.5)),
                row("bear", Family::Skewed, 1, dec!(2)),
                row("bear", Family::Base, 2, dec!(-0.25)),
            ],
            None,
        )
        .unwrap();
        let tables = figure_tables(&rows);
        assert_eq!(tables.len(), 1);
        let mut buf = Vec::new();
        tables[0].write_csv(&mut buf).unwrap();
        assert_eq!(tables[0].file_name(), "figure_bear_minute.csv");
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "period_days,base,skewed,hodler\n1,1.50,2.00,1.00\n2,-0.25,,1.00\n"
        );
    }
}
