//! CSV ingestion and canonical serialization.
//!
//! Schemas:
//!
//! - `trades.csv`: `timestamp_ms,price,qty,side` with `side` in `buy|sell`.
//! - `book.csv`: `timestamp_ms` followed by 50 `bid_px_i,bid_qty_i` pairs
//!   and 50 `ask_px_i,ask_qty_i` pairs; absent levels are empty cells.
//! - `ohlcv.csv`: `timestamp_ms,open,high,low,close,volume`.
//!
//! Numbers are plain decimal strings (no exponents), UTF-8, LF line endings.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_decimal::Decimal;

use super::dataset::MarketDataset;
use super::types::{AggressorSide, BookLevel, Candle, Granularity, OrderBookSnapshot, Trade, MAX_LEVELS};
use super::DataError;

pub const TRADES_FILE: &str = "trades.csv";
pub const BOOK_FILE: &str = "book.csv";
pub const CANDLES_FILE: &str = "ohlcv.csv";

pub const TRADES_HEADER: &str = "timestamp_ms,price,qty,side";
pub const CANDLES_HEADER: &str = "timestamp_ms,open,high,low,close,volume";

pub fn book_header() -> String {
    let mut h = String::from("timestamp_ms");
    for side in ["bid", "ask"] {
        for i in 1..=MAX_LEVELS {
            let _ = write!(h, ",{side}_px_{i},{side}_qty_{i}");
        }
    }
    h
}

const BOOK_COLUMNS: usize = 1 + 4 * MAX_LEVELS;

/// Loads and checks the three CSV files of a dataset.
///
/// Row-level invariants (parseable values, positive prices and quantities,
/// ordered book sides, no crossed book, non-decreasing timestamps) are
/// enforced here. Coverage rules such as gaps between snapshots are left to
/// [`super::validate_dataset`].
pub fn load_dataset(
    trades_path: &Path,
    snapshots_path: &Path,
    candles_path: Option<&Path>,
    granularity: Granularity,
) -> Result<MarketDataset, DataError> {
    let trades = read_trades(trades_path)?;
    let snapshots = read_book(snapshots_path)?;
    let candles = match candles_path {
        Some(p) => read_candles(p)?,
        None => Vec::new(),
    };
    Ok(MarketDataset::new(granularity, snapshots, trades, candles))
}

/// Loads `trades.csv`, `book.csv` and, when present, `ohlcv.csv` from `dir`.
pub fn load_dir(dir: &Path, granularity: Option<Granularity>) -> Result<MarketDataset, DataError> {
    let candles = dir.join(CANDLES_FILE);
    let candles = candles.exists().then_some(candles);
    let book = dir.join(BOOK_FILE);
    let granularity = match granularity {
        Some(g) => g,
        None => {
            let snapshots = read_book(&book)?;
            let stamps: Vec<i64> = snapshots.iter().map(|s| s.timestamp).collect();
            Granularity::infer(&stamps).ok_or_else(|| DataError::Header {
                path: book.clone(),
                message: "cannot infer granularity from snapshot spacing".into(),
            })?
        }
    };
    load_dataset(&dir.join(TRADES_FILE), &book, candles.as_deref(), granularity)
}

/// Writes the canonical CSV form of `ds` into `dir`. The candles file is only
/// written when the dataset carries candles.
pub fn write_dataset(ds: &MarketDataset, dir: &Path) -> Result<(), DataError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_file(&dir.join(TRADES_FILE), |w| {
        writeln!(w, "{TRADES_HEADER}")?;
        for t in ds.trades() {
            writeln!(w, "{},{},{},{}", t.timestamp, t.price, t.quantity, t.aggressor.as_str())?;
        }
        Ok(())
    })?;
    write_file(&dir.join(BOOK_FILE), |w| {
        writeln!(w, "{}", book_header())?;
        let mut line = String::with_capacity(4096);
        for s in ds.snapshots() {
            line.clear();
            let _ = write!(line, "{}", s.timestamp);
            for levels in [&s.bids, &s.asks] {
                for i in 0..MAX_LEVELS {
                    match levels.get(i) {
                        Some(l) => {
                            let _ = write!(line, ",{},{}", l.price, l.quantity);
                        }
                        None => line.push_str(",,"),
                    }
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    if !ds.candles().is_empty() {
        write_file(&dir.join(CANDLES_FILE), |w| {
            writeln!(w, "{CANDLES_HEADER}")?;
            for c in ds.candles() {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    c.timestamp, c.open, c.high, c.low, c.close, c.volume
                )?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct Rows {
    path: PathBuf,
    reader: csv::Reader<File>,
}

impl Rows {
    fn open(path: &Path, expected_header: &str) -> Result<Self, DataError> {
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != expected_header {
            return Err(DataError::Header {
                path: path.to_path_buf(),
                message: format!("expected `{}`", truncate(expected_header)),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            reader,
        })
    }

    fn for_each(
        mut self,
        columns: usize,
        mut f: impl FnMut(&Cells<'_>) -> Result<(), DataError>,
    ) -> Result<(), DataError> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {}
                Err(e) => return Err(csv_err(&self.path, e)),
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let cells = Cells {
                path: &self.path,
                line,
                record: &record,
            };
            if record.len() != columns {
                return Err(cells.malformed(format!(
                    "expected {columns} columns, found {}",
                    record.len()
                )));
            }
            f(&cells)?;
        }
    }
}

fn truncate(s: &str) -> String {
    if s.len() > 60 {
        format!("{}...", &s[..60])
    } else {
        s.to_string()
    }
}

fn csv_err(path: &Path, e: csv::Error) -> DataError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    DataError::Malformed {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

struct Cells<'a> {
    path: &'a Path,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Cells<'_> {
    fn malformed(&self, message: String) -> DataError {
        DataError::Malformed {
            path: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn raw(&self, i: usize) -> &str {
        &self.record[i]
    }

    fn timestamp(&self) -> Result<i64, DataError> {
        self.raw(0)
            .parse()
            .map_err(|_| self.malformed(format!("bad timestamp `{}`", self.raw(0))))
    }

    fn decimal(&self, i: usize, what: &str) -> Result<Decimal, DataError> {
        parse_plain_decimal(self.raw(i))
            .ok_or_else(|| self.malformed(format!("bad {what} `{}`", self.raw(i))))
    }

    fn positive(&self, i: usize, what: &str) -> Result<Decimal, DataError> {
        let v = self.decimal(i, what)?;
        if v <= Decimal::ZERO {
            return Err(self.malformed(format!("{what} must be positive, got {v}")));
        }
        Ok(v)
    }
}

/// Parses `[-]digits[.digits]`; exponents and other notations are rejected.
pub fn parse_plain_decimal(s: &str) -> Option<Decimal> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let mut parts = body.splitn(2, '.');
    let int = parts.next()?;
    let frac = parts.next();
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    Decimal::from_str(s).ok()
}

fn read_trades(path: &Path) -> Result<Vec<Trade>, DataError> {
    let mut out: Vec<Trade> = Vec::new();
    Rows::open(path, TRADES_HEADER)?.for_each(4, |c| {
        let timestamp = c.timestamp()?;
        let price = c.positive(1, "price")?;
        let quantity = c.positive(2, "qty")?;
        let aggressor = AggressorSide::from_str(c.raw(3)).map_err(|m| c.malformed(m))?;
        if out.last().is_some_and(|prev| timestamp < prev.timestamp) {
            return Err(DataError::TimestampRegression {
                path: path.to_path_buf(),
                line: c.line,
            });
        }
        out.push(Trade {
            timestamp,
            price,
            quantity,
            aggressor,
        });
        Ok(())
    })?;
    Ok(out)
}

fn read_levels(c: &Cells<'_>, first_col: usize, side: &str) -> Result<Vec<BookLevel>, DataError> {
    let mut levels = Vec::new();
    let mut ended = false;
    for i in 0..MAX_LEVELS {
        let px_col = first_col + 2 * i;
        let (px, qty) = (c.raw(px_col), c.raw(px_col + 1));
        match (px.is_empty(), qty.is_empty()) {
            (true, true) => ended = true,
            (false, false) if !ended => {
                let price = c.positive(px_col, &format!("{side}_px_{}", i + 1))?;
                let quantity = c.positive(px_col + 1, &format!("{side}_qty_{}", i + 1))?;
                levels.push(BookLevel { price, quantity });
            }
            (false, false) => {
                return Err(c.malformed(format!("{side} level {} follows an empty level", i + 1)))
            }
            _ => return Err(c.malformed(format!("{side} level {} is half empty", i + 1))),
        }
    }
    Ok(levels)
}

fn read_book(path: &Path) -> Result<Vec<OrderBookSnapshot>, DataError> {
    let header = book_header();
    let mut out: Vec<OrderBookSnapshot> = Vec::new();
    Rows::open(path, &header)?.for_each(BOOK_COLUMNS, |c| {
        let timestamp = c.timestamp()?;
        let bids = read_levels(c, 1, "bid")?;
        let asks = read_levels(c, 1 + 2 * MAX_LEVELS, "ask")?;
        if bids.windows(2).any(|w| w[1].price >= w[0].price) {
            return Err(c.malformed("bids are not strictly descending".into()));
        }
        if asks.windows(2).any(|w| w[1].price <= w[0].price) {
            return Err(c.malformed("asks are not strictly ascending".into()));
        }
        let snapshot = OrderBookSnapshot {
            timestamp,
            bids,
            asks,
        };
        if snapshot.is_crossed() {
            return Err(DataError::CrossedBook {
                path: path.to_path_buf(),
                line: c.line,
                bid: snapshot.bids[0].price,
                ask: snapshot.asks[0].price,
            });
        }
        if out.last().is_some_and(|prev| timestamp <= prev.timestamp) {
            return Err(DataError::TimestampRegression {
                path: path.to_path_buf(),
                line: c.line,
            });
        }
        out.push(snapshot);
        Ok(())
    })?;
    Ok(out)
}

fn read_candles(path: &Path) -> Result<Vec<Candle>, DataError> {
    let mut out: Vec<Candle> = Vec::new();
    Rows::open(path, CANDLES_HEADER)?.for_each(6, |c| {
        let timestamp = c.timestamp()?;
        let candle = Candle {
            timestamp,
            open: c.positive(1, "open")?,
            high: c.positive(2, "high")?,
            low: c.positive(3, "low")?,
            close: c.positive(4, "close")?,
            volume: c.decimal(5, "volume")?,
        };
        if candle.volume < Decimal::ZERO {
            return Err(c.malformed("negative volume".into()));
        }
        if out.last().is_some_and(|prev| timestamp <= prev.timestamp) {
            return Err(DataError::TimestampRegression {
                path: path.to_path_buf(),
                line: c.line,
            });
        }
        out.push(candle);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_decimals_only() {
        assert_eq!(parse_plain_decimal("100.50").unwrap().to_string(), "100.50");
        assert_eq!(parse_plain_decimal("-3").unwrap().to_string(), "-3");
        for bad in ["1e5", "", ".5", "5.", "1,0", "+1", "0x10", " 1"] {
            assert!(parse_plain_decimal(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn book_header_shape() {
        let h = book_header();
        let cols: Vec<_> = h.split(',').collect();
        assert_eq!(cols.len(), BOOK_COLUMNS);
        assert_eq!(cols[1], "bid_px_1");
        assert_eq!(cols[100], "bid_qty_50");
        assert_eq!(cols[101], "ask_px_1");
        assert_eq!(cols[200], "ask_qty_50");
    }
}
