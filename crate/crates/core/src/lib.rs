//! Market-making simulation laboratory.
//!
//! The crate replays historical (or synthetic) limit order book snapshots and
//! trade prints, injects limit orders placed by simulated market-making agents
//! into those books, and lets a chair agent periodically re-select which
//! sub-agents trade for real based on their internally backtested return and
//! alpha over a buy-and-hold baseline.
//!
//! Module map:
//!
//! - [`marketdata`]: trades, 50-level book snapshots, OHLCV frames; CSV
//!   ingestion, validation, slicing and a seeded regime generator.
//! - [`exchange`]: accounts with locked funds, injected orders and the
//!   matching engine that lets historical trades hit injected orders.
//! - [`agents`]: the Base, Skewed, PureMm and Hodler strategy families and
//!   their configuration grids.
//! - [`amsa`]: the chair agent (period schedule, selection, redistribution,
//!   experiment loop).
//! - [`metrics`]: ROI, alpha, the hodler reference and result tables.

pub mod agents;
pub mod amsa;
pub mod error;
pub mod exchange;
pub mod marketdata;
pub mod metrics;
pub mod num;

pub use error::Error;
pub use rust_decimal::Decimal;

pub type Result<T, E = Error> = std::result::Result<T, E>;
