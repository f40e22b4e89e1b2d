//! Brute-force reference matcher.
//!
//! Every unit of maker-side liquidity (book level or injected order) is
//! pooled, filtered by what the trade may reach and fully re-sorted before
//! each trade. Slow, but simple enough to trust.

use std::cmp::Ordering;

use amsa_core::exchange::{AgentId, FillTrigger, MatchRules, MatchingMode, OrderId, Side};
use amsa_core::marketdata::{AggressorSide, OrderBookSnapshot, Trade};
use amsa_core::Decimal;

#[derive(Debug, Clone)]
pub struct RefOrder {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub price: Decimal,
    pub quantity: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefFill {
    pub agent: AgentId,
    pub order_id: OrderId,
    pub side: Side,
    pub timestamp: i64,
    pub price: Decimal,
    pub quantity: Decimal,
    pub fee: Decimal,
}

impl RefFill {
    pub fn base_delta(&self) -> Decimal {
        if self.side == Side::Bid { self.quantity - self.fee } else { -self.quantity }
    }

    pub fn quote_delta(&self) -> Decimal {
        if self.side == Side::Bid { -self.price * self.quantity } else { self.price * self.quantity - self.fee }
    }
}

#[derive(Clone, Copy)]
enum Source {
    Book(usize),
    Order(usize),
}

/// Fills of one interval, agents in ascending id order, each agent matched
/// against its own untouched copy of `snapshot`.
pub fn reference_fills(snapshot: &OrderBookSnapshot, orders: &[RefOrder], trades: &[Trade], rules: &MatchRules) -> Vec<RefFill> {
    let mut agents: Vec<AgentId> = orders.iter().map(|o| o.agent).collect();
    agents.sort();
    agents.dedup();
    let mut out = Vec::new();
    for agent in agents {
        let mut mine: Vec<RefOrder> = orders.iter().filter(|o| o.agent == agent).cloned().collect();
        let mut bids: Vec<Decimal> = snapshot.bids.iter().map(|l| l.quantity).collect();
        let mut asks: Vec<Decimal> = snapshot.asks.iter().map(|l| l.quantity).collect();
        for t in trades {
            let maker = if t.aggressor == AggressorSide::Buy { Side::Ask } else { Side::Bid };
            let (levels, book_left) = match maker {
                Side::Ask => (&snapshot.asks, &mut asks),
                Side::Bid => (&snapshot.bids, &mut bids),
            };
            // how far the price of a resting unit is from the trade, in the
            // taker's favour; zero means "at the trade price"
            let improvement = |price: Decimal| if maker == Side::Ask { t.price - price } else { price - t.price };

            let mut pool: Vec<(Decimal, u8, u64, Source)> = Vec::new();
            for (i, level) in levels.iter().enumerate() {
                if book_left[i] > Decimal::ZERO && improvement(level.price) >= Decimal::ZERO {
                    let class = u8::from(rules.mode == MatchingMode::InjectedFirst);
                    pool.push((level.price, class, i as u64, Source::Book(i)));
                }
            }
            for (i, o) in mine.iter().enumerate() {
                let gain = improvement(o.price);
                let allowed = match rules.trigger {
                    FillTrigger::StrictCross => gain > Decimal::ZERO,
                    FillTrigger::Touch => gain >= Decimal::ZERO,
                };
                if o.side == maker && o.quantity > Decimal::ZERO && allowed {
                    let class = u8::from(rules.mode == MatchingMode::HistoricalFirst);
                    pool.push((o.price, class, o.id, Source::Order(i)));
                }
            }
            pool.sort_by(|a, b| {
                let by_price = match maker {
                    Side::Ask => a.0.cmp(&b.0),
                    Side::Bid => b.0.cmp(&a.0),
                };
                by_price.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(Ordering::Equal)
            });

            let mut left = t.quantity;
            for (price, _, _, source) in pool {
                if left == Decimal::ZERO {
                    break;
                }
                match source {
                    Source::Book(i) => {
                        let q = left.min(book_left[i]);
                        book_left[i] -= q;
                        left -= q;
                    }
                    Source::Order(i) => {
                        let q = left.min(mine[i].quantity);
                        mine[i].quantity -= q;
                        left -= q;
                        let fee = match maker {
                            Side::Bid => rules.fee_rate * q,
                            Side::Ask => rules.fee_rate * price * q,
                        };
                        out.push(RefFill {
                            agent,
                            order_id: mine[i].id,
                            side: maker,
                            timestamp: t.timestamp,
                            price,
                            quantity: q,
                            fee,
                        });
                    }
                }
            }
        }
    }
    out
}
