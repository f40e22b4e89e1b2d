//! The TOML experiment file.

use std::path::{Path, PathBuf};

use amsa_core::agents::{AgentParams, Family, GridSpec};
use amsa_core::amsa::{ExperimentConfig, FamilySpec, SelectionPolicy};
use amsa_core::exchange::{FillTrigger, MatchRules, MatchingMode};
use amsa_core::marketdata::{Granularity, RegimeSpec, Trend, Volatility};
use rust_decimal::Decimal;
use serde::Deserialize;

use crate::CliError;

/// Top-level layout of the experiment file. Every table and key is
/// optional; an empty file describes the default matrix.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSection,
    pub grids: GridSpec,
    pub markets: Vec<MarketSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub granularity: Granularity,
    pub period_days: Vec<u32>,
    pub families: Vec<Family>,
    pub initial_base: Decimal,
    pub initial_quote: Option<Decimal>,
    pub fee_rate: Decimal,
    pub matching_mode: MatchingMode,
    pub fill_trigger: FillTrigger,
    pub selection_policy: SelectionPolicy,
    pub order_fraction: Decimal,
    pub min_notional: Decimal,
    /// Days traded for real in every cell.
    pub run_days: u32,
    /// First real-trading timestamp. Defaults to the data start plus the
    /// longest period, so that every cell shares the same window.
    pub start_ms: Option<i64>,
    pub record_fills: bool,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let rules = MatchRules::default();
        let params = AgentParams::default();
        Self {
            granularity: Granularity::Minute,
            period_days: vec![1, 2, 3, 5],
            families: vec![Family::Base, Family::Skewed, Family::PureMm],
            initial_base: Decimal::new(1, 1),
            initial_quote: None,
            fee_rate: rules.fee_rate,
            matching_mode: rules.mode,
            fill_trigger: rules.trigger,
            selection_policy: SelectionPolicy::default(),
            order_fraction: params.order_fraction,
            min_notional: params.min_notional,
            run_days: 5,
            start_ms: None,
            record_fills: false,
            seed: 42,
        }
    }
}

/// A market is either a dataset directory or a synthetic regime.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub name: String,
    /// Dataset directory, relative to `--data-dir` unless absolute.
    pub data: Option<PathBuf>,
    pub regime: Option<RegimeSpec>,
}

/// Where a market's data comes from once the config is resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum MarketSource {
    Directory(PathBuf),
    Synthetic(RegimeSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub name: String,
    pub source: MarketSource,
}

/// Regime keys the runner derives itself.
const DERIVED_REGIME_KEYS: [&str; 2] = ["seed", "duration"];

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        if let Some(toml::Value::Array(markets)) = table.get("markets") {
            for (i, m) in markets.iter().enumerate() {
                let Some(regime) = m.get("regime").and_then(toml::Value::as_table) else {
                    continue;
                };
                if let Some(key) = DERIVED_REGIME_KEYS.iter().find(|k| regime.contains_key(**k)) {
                    return Err(CliError::Config(format!(
                        "markets[{i}].regime.{key} is derived from the experiment section and must not be set"
                    )));
                }
            }
        }
        let cfg: Config = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        let e = &self.experiment;
        let bad = |m: String| Err(CliError::Config(m));
        if e.period_days.is_empty() || e.period_days.contains(&0) {
            return bad("experiment.period_days must list positive day counts".into());
        }
        if e.families.is_empty() {
            return bad("experiment.families must not be empty".into());
        }
        for (what, list) in [("period_days", has_duplicates(&e.period_days)), ("families", has_duplicates(&e.families))] {
            if list {
                return bad(format!("experiment.{what} has duplicate entries"));
            }
        }
        if e.run_days == 0 {
            return bad("experiment.run_days must be positive".into());
        }
        if let Some(&p) = e.period_days.iter().find(|&&p| p > e.run_days) {
            return bad(format!("period of {p} days is longer than run_days = {}", e.run_days));
        }
        let mut names: Vec<&str> = self.markets.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("market names must be unique".into());
        }
        for m in &self.markets {
            if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("market name {:?} must be non-empty ASCII letters, digits, '_' or '-'", m.name));
            }
            if m.data.is_some() == m.regime.is_some() {
                return bad(format!("market {} needs exactly one of `data` or `regime`", m.name));
            }
        }
        Ok(())
    }

    /// The configured markets, or the three default regimes when none are
    /// listed. Regime seeds are the experiment seed plus the market's
    /// position in the list.
    pub fn markets(&self, data_dir: Option<&Path>) -> Result<Vec<Market>, CliError> {
        let sections = if self.markets.is_empty() { default_markets() } else { self.markets.clone() };
        let days = self.total_days();
        sections
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let source = match (m.data, m.regime) {
                    (Some(path), _) => {
                        let path = match data_dir {
                            _ if path.is_absolute() => path,
                            Some(root) => root.join(path),
                            None => {
                                return Err(CliError::Usage(format!("market {} reads data but no --data-dir was given", m.name)))
                            }
                        };
                        MarketSource::Directory(path)
                    }
                    (None, Some(mut regime)) => {
                        regime.seed = self.experiment.seed.wrapping_add(i as u64);
                        regime.duration = (i64::from(days) * self.experiment.granularity.intervals_per_day()) as usize;
                        MarketSource::Synthetic(regime)
                    }
                    (None, None) => unreachable!("checked at load"),
                };
                Ok(Market { name: m.name, source })
            })
            .collect()
    }

    pub fn longest_period(&self) -> u32 {
        self.experiment.period_days.iter().copied().max().unwrap_or(1)
    }

    /// Warmup for the longest period plus the real-trading days.
    pub fn total_days(&self) -> u32 {
        self.longest_period() + self.experiment.run_days
    }

    pub fn rules(&self) -> MatchRules {
        MatchRules {
            mode: self.experiment.matching_mode,
            trigger: self.experiment.fill_trigger,
            fee_rate: self.experiment.fee_rate,
        }
    }

    /// Grid overrides apply to whichever families they concern.
    fn family_spec(&self, family: Family) -> FamilySpec {
        let grid = (self.grids != GridSpec::default()).then(|| self.grids.clone());
        FamilySpec { family, grid }
    }

    /// Core experiment config for one cell. `data_start` is the first
    /// snapshot of the market.
    pub fn cell_config(&self, family: Family, period_days: u32, data_start: i64) -> ExperimentConfig {
        let e = &self.experiment;
        let g = e.granularity;
        let day = g.intervals_per_day() * g.interval_ms();
        let start = e.start_ms.unwrap_or(data_start + i64::from(self.longest_period()) * day);
        let mut cfg = ExperimentConfig::new(g, period_days, start, start + i64::from(e.run_days) * day);
        cfg.families = vec![self.family_spec(family)];
        cfg.initial_base = e.initial_base;
        cfg.initial_quote = e.initial_quote;
        cfg.rules = self.rules();
        cfg.selection = e.selection_policy;
        cfg.params = AgentParams {
            order_fraction: e.order_fraction,
            min_notional: e.min_notional,
            ..AgentParams::default()
        };
        cfg.record_fills = e.record_fills;
        cfg
    }
}

fn has_duplicates<T: Ord + Clone>(v: &[T]) -> bool {
    let mut s = v.to_vec();
    s.sort();
    s.windows(2).any(|w| w[0] == w[1])
}

fn regime(trend: Trend, volatility: Volatility, drift: Decimal) -> RegimeSpec {
    RegimeSpec {
        trend,
        volatility,
        drift: Some(drift),
        ..RegimeSpec::default()
    }
}

/// Bull with low volatility (+12.9%), bull with high volatility (+9.2%) and
/// a volatile bear (-19.1%).
pub fn default_markets() -> Vec<MarketSection> {
    [
        ("bull_low", regime(Trend::Bull, Volatility::Low, Decimal::new(129, 3))),
        ("bull_high", regime(Trend::Bull, Volatility::High, Decimal::new(92, 3))),
        ("bear", regime(Trend::Bear, Volatility::High, Decimal::new(-191, 3))),
    ]
    .into_iter()
    .map(|(name, r)| MarketSection {
        name: name.into(),
        data: None,
        regime: Some(r),
    })
    .collect()
}
