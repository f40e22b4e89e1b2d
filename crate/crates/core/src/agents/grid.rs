use std::collections::HashSet;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{AgentConfig, AgentError, BaseConfig, CancelPolicy, Family, PureMmConfig, SkewedConfig};

/// Default Base spreads, in percent.
pub const DEFAULT_BASE_SPREADS_PCT: [Decimal; 5] = [
    Decimal::from_parts(1, 0, 0, false, 1),
    Decimal::from_parts(2, 0, 0, false, 1),
    Decimal::from_parts(5, 0, 0, false, 1),
    Decimal::from_parts(1, 0, 0, false, 0),
    Decimal::from_parts(2, 0, 0, false, 0),
];

/// Default Skewed bid spreads, in percent.
pub const DEFAULT_SKEWED_BID_PCT: [Decimal; 5] = DEFAULT_BASE_SPREADS_PCT;

/// Default Skewed ask spreads, in percent.
pub const DEFAULT_SKEWED_ASK_PCT: [Decimal; 10] = [
    Decimal::from_parts(1, 0, 0, false, 1),
    Decimal::from_parts(2, 0, 0, false, 1),
    Decimal::from_parts(3, 0, 0, false, 1),
    Decimal::from_parts(5, 0, 0, false, 1),
    Decimal::from_parts(8, 0, 0, false, 1),
    Decimal::from_parts(1, 0, 0, false, 0),
    Decimal::from_parts(15, 0, 0, false, 1),
    Decimal::from_parts(2, 0, 0, false, 0),
    Decimal::from_parts(3, 0, 0, false, 0),
    Decimal::from_parts(5, 0, 0, false, 0),
];

/// PureMm bid and ask level set, in percent.
pub const PUREMM_LEVELS_PCT: [Decimal; 6] = [
    Decimal::from_parts(3, 0, 0, false, 1),
    Decimal::from_parts(5, 0, 0, false, 1),
    Decimal::from_parts(8, 0, 0, false, 1),
    Decimal::from_parts(13, 0, 0, false, 1),
    Decimal::from_parts(34, 0, 0, false, 1),
    Decimal::from_parts(55, 0, 0, false, 1),
];

/// Optional replacements for the default family grids. All spreads and
/// levels are in percent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub base_spreads_pct: Option<Vec<Decimal>>,
    pub base_policies: Option<Vec<CancelPolicy>>,
    pub skewed_bid_pct: Option<Vec<Decimal>>,
    pub skewed_ask_pct: Option<Vec<Decimal>>,
    pub puremm_bid_levels: Option<Vec<Decimal>>,
    pub puremm_ask_levels: Option<Vec<Decimal>>,
}

fn pick<'a>(
    field: &'static str,
    custom: &'a Option<Vec<Decimal>>,
    default: &'a [Decimal],
) -> Result<&'a [Decimal], AgentError> {
    let values = custom.as_deref().unwrap_or(default);
    if values.is_empty() {
        return Err(AgentError::InvalidConfig(format!("{field} must not be empty")));
    }
    let mut seen = HashSet::new();
    for v in values {
        if *v <= Decimal::ZERO {
            return Err(AgentError::InvalidConfig(format!("{field} must be positive, got {v}")));
        }
        if !seen.insert(v.normalize()) {
            return Err(AgentError::DuplicateGrid {
                field,
                value: v.normalize().to_string(),
            });
        }
    }
    Ok(values)
}

fn fraction(pct: Decimal) -> Decimal {
    (pct / Decimal::ONE_HUNDRED).normalize()
}

/// Expands a family into its configuration grid, in a fixed order.
pub fn enumerate_family(family: Family, grid: Option<&GridSpec>) -> Result<Vec<AgentConfig>, AgentError> {
    let empty = GridSpec::default();
    let grid = grid.unwrap_or(&empty);
    let configs = match family {
        Family::Base => {
            let spreads = pick("base_spreads_pct", &grid.base_spreads_pct, &DEFAULT_BASE_SPREADS_PCT)?;
            let policies = grid.base_policies.as_deref().unwrap_or(&CancelPolicy::ALL);
            if policies.is_empty() {
                return Err(AgentError::InvalidConfig("base_policies must not be empty".into()));
            }
            let mut seen = HashSet::new();
            for p in policies {
                if !seen.insert(*p) {
                    return Err(AgentError::DuplicateGrid {
                        field: "base_policies",
                        value: p.as_str().to_string(),
                    });
                }
            }
            spreads
                .iter()
                .flat_map(|&s| {
                    policies.iter().map(move |&cancel_policy| {
                        AgentConfig::Base(BaseConfig {
                            spread: fraction(s),
                            cancel_policy,
                        })
                    })
                })
                .collect()
        }
        Family::Skewed => {
            let bids = pick("skewed_bid_pct", &grid.skewed_bid_pct, &DEFAULT_SKEWED_BID_PCT)?;
            let asks = pick("skewed_ask_pct", &grid.skewed_ask_pct, &DEFAULT_SKEWED_ASK_PCT)?;
            bids.iter()
                .flat_map(|&b| {
                    asks.iter().map(move |&a| {
                        AgentConfig::Skewed(SkewedConfig {
                            bid_spread: fraction(b),
                            ask_spread: fraction(a),
                        })
                    })
                })
                .collect()
        }
        Family::PureMm => {
            let bids = pick("puremm_bid_levels", &grid.puremm_bid_levels, &PUREMM_LEVELS_PCT)?;
            let asks = pick("puremm_ask_levels", &grid.puremm_ask_levels, &PUREMM_LEVELS_PCT)?;
            bids.iter()
                .flat_map(|&b| {
                    asks.iter().map(move |&a| {
                        AgentConfig::PureMm(PureMmConfig {
                            bid_level_pct: b.normalize(),
                            ask_level_pct: a.normalize(),
                        })
                    })
                })
                .collect()
        }
        Family::Hodler => vec![AgentConfig::Hodler],
    };
    Ok(configs)
}
