//! Market data: trades, 50-level book snapshots and OHLCV frames.

mod csvio;
mod dataset;
mod synth;
mod types;
mod validate;

use std::path::PathBuf;

use rust_decimal::Decimal;
use thiserror::Error;

pub use csvio::{
    book_header, load_dataset, load_dir, parse_plain_decimal, write_dataset, BOOK_FILE, CANDLES_FILE,
    CANDLES_HEADER, TRADES_FILE, TRADES_HEADER,
};
pub use dataset::{slice_dataset, MarketDataset};
pub use synth::{generate_synthetic, RegimeSpec, Trend, Volatility};
pub use types::{AggressorSide, BookLevel, Candle, Granularity, OrderBookSnapshot, Trade, MAX_LEVELS};
pub use validate::{validate_dataset, Finding, Rule, ValidationReport};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: bad header: {message}", path.display())]
    Header { path: PathBuf, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}:{line}: timestamp regression", path.display())]
    TimestampRegression { path: PathBuf, line: u64 },
    #[error("{}:{line}: crossed book (best bid {bid} > best ask {ask})", path.display())]
    CrossedBook {
        path: PathBuf,
        line: u64,
        bid: Decimal,
        ask: Decimal,
    },
    #[error("invalid slice: {0}")]
    Slice(String),
    #[error("invalid regime: {0}")]
    Regime(String),
}
