use rust_decimal::Decimal;
use smallvec::SmallVec;

use super::{Fill, FillTrigger, MatchRules, MatchingMode, Order, OrderId, Side};
use crate::marketdata::{AggressorSide, BookLevel, OrderBookSnapshot, Trade};
use crate::num::{floor_to, ASSET_SCALE};

/// Depletion state of one book side.
///
/// Trades always consume historical liquidity from the best level outward,
/// so the consumed part of a side is a prefix: every level before `level` is
/// exhausted and `consumed` has been taken from `level`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BookCursor {
    pub level: usize,
    pub consumed: Decimal,
}

impl BookCursor {
    fn peek(&self, levels: &[BookLevel]) -> Option<(Decimal, Decimal)> {
        levels
            .get(self.level)
            .map(|l| (l.price, l.quantity - self.consumed))
    }

    fn consume(&mut self, levels: &[BookLevel], qty: Decimal) {
        self.consumed += qty;
        if self.consumed >= levels[self.level].quantity {
            self.level += 1;
            self.consumed = Decimal::ZERO;
        }
    }
}

/// A snapshot plus the historical liquidity consumed so far in the interval.
#[derive(Debug, Clone)]
pub struct WorkingBook<'a> {
    snapshot: &'a OrderBookSnapshot,
    pub bids: BookCursor,
    pub asks: BookCursor,
}

impl<'a> WorkingBook<'a> {
    pub fn new(snapshot: &'a OrderBookSnapshot) -> Self {
        Self {
            snapshot,
            bids: BookCursor::default(),
            asks: BookCursor::default(),
        }
    }

    pub fn snapshot(&self) -> &'a OrderBookSnapshot {
        self.snapshot
    }

    /// Quantity still resting at level `index` of `side`.
    pub fn remaining(&self, side: Side, index: usize) -> Decimal {
        let (levels, cursor) = match side {
            Side::Bid => (&self.snapshot.bids, &self.bids),
            Side::Ask => (&self.snapshot.asks, &self.asks),
        };
        match index.cmp(&cursor.level) {
            std::cmp::Ordering::Less => Decimal::ZERO,
            std::cmp::Ordering::Equal => levels[index].quantity - cursor.consumed,
            std::cmp::Ordering::Greater => levels.get(index).map_or(Decimal::ZERO, |l| l.quantity),
        }
    }
}

type Queue = SmallVec<[(Decimal, OrderId, Decimal, usize); 4]>;

/// Executes one historical trade against the working book and the injected
/// orders.
///
/// An aggressive buy at price `p` may consume historical asks priced at or
/// below `p` and injected asks priced below `p` (or at `p` under
/// [`FillTrigger::Touch`]). Liquidity is consumed best price first; at equal
/// prices the [`MatchingMode`] decides whether historical or injected
/// quantity goes first, and injected orders queue by order id. Sells mirror
/// this on the bid side. Historical consumption is recorded in `book`; the
/// injected orders are not modified, the caller applies the returned fills.
pub fn match_trade(book: &mut WorkingBook<'_>, injected: &[Order], trade: &Trade, rules: &MatchRules) -> Vec<Fill> {
    let p = trade.price;
    let (maker, levels, cursor) = match trade.aggressor {
        AggressorSide::Buy => (Side::Ask, &book.snapshot.asks, &mut book.asks),
        AggressorSide::Sell => (Side::Bid, &book.snapshot.bids, &mut book.bids),
    };
    // `better(a, b)`: price `a` is reached by the taker before price `b`.
    let better = |a: Decimal, b: Decimal| match maker {
        Side::Ask => a < b,
        Side::Bid => a > b,
    };
    let reachable = |price: Decimal| price == p || better(price, p);
    let eligible = |price: Decimal| match rules.trigger {
        FillTrigger::StrictCross => better(price, p),
        FillTrigger::Touch => reachable(price),
    };

    let mut queue: Queue = injected
        .iter()
        .enumerate()
        .filter(|(_, o)| o.side == maker && o.is_open() && o.remaining() > Decimal::ZERO && eligible(o.price))
        .map(|(i, o)| (o.price, o.id, o.remaining(), i))
        .collect();
    queue.sort_by(|a, b| {
        if a.0 == b.0 {
            a.1.cmp(&b.1)
        } else if better(a.0, b.0) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });

    let mut fills = Vec::new();
    let mut left = trade.quantity;
    let mut next = 0;
    while left > Decimal::ZERO {
        let hist = cursor.peek(levels).filter(|(price, _)| reachable(*price));
        let inj = queue.get(next);
        let take_historical = match (hist, inj) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some((hp, _)), Some(o)) if hp == o.0 => rules.mode == MatchingMode::HistoricalFirst,
            (Some((hp, _)), Some(o)) => better(hp, o.0),
        };
        if take_historical {
            let (_, available) = hist.expect("historical level present");
            let qty = left.min(available);
            cursor.consume(levels, qty);
            left -= qty;
        } else {
            let &(price, order_id, remaining, idx) = inj.expect("injected order present");
            let qty = left.min(remaining);
            let fee = match maker {
                Side::Bid => rules.fee_rate * qty,
                Side::Ask => rules.fee_rate * price * qty,
            };
            fills.push(Fill {
                order_id,
                agent: injected[idx].agent,
                side: maker,
                timestamp: trade.timestamp,
                price,
                quantity: qty,
                fee,
            });
            left -= qty;
            next += 1;
        }
    }
    fills
}

/// Result of walking book levels with a marketable order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BookWalk {
    /// `(price, quantity)` executed per level, best level first.
    pub executions: Vec<(Decimal, Decimal)>,
    /// Quote spent (buys) or base sold (sells).
    pub spent: Decimal,
    /// Base bought or quote received, before fees.
    pub received: Decimal,
    /// True when the book ran out before the order was satisfied.
    pub exhausted: bool,
}

/// Spends up to `budget` quote buying through `asks`, best first. Quantities
/// are floored to asset precision so the cost never exceeds the budget.
pub fn walk_asks(asks: &[BookLevel], budget: Decimal) -> BookWalk {
    let mut walk = BookWalk::default();
    let mut left = budget;
    for level in asks {
        let affordable = floor_to(left / level.price, ASSET_SCALE);
        let qty = affordable.min(level.quantity);
        if qty <= Decimal::ZERO {
            return walk;
        }
        let cost = qty * level.price;
        left -= cost;
        walk.spent += cost;
        walk.received += qty;
        walk.executions.push((level.price, qty));
    }
    walk.exhausted = match asks.last() {
        Some(last) => floor_to(left / last.price, ASSET_SCALE) > Decimal::ZERO,
        None => budget > Decimal::ZERO,
    };
    walk
}

/// Sells `quantity` base through `bids`, best first.
pub fn walk_bids(bids: &[BookLevel], quantity: Decimal) -> BookWalk {
    let mut walk = BookWalk::default();
    let mut left = quantity;
    for level in bids {
        if left <= Decimal::ZERO {
            break;
        }
        let qty = left.min(level.quantity);
        left -= qty;
        walk.spent += qty;
        walk.received += qty * level.price;
        walk.executions.push((level.price, qty));
    }
    walk.exhausted = left > Decimal::ZERO;
    walk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{AgentId, OrderStatus};
    use rust_decimal_macros::dec;

    fn ask_book(levels: &[(Decimal, Decimal)]) -> OrderBookSnapshot {
        OrderBookSnapshot {
            timestamp: 0,
            bids: vec![BookLevel::new(dec!(90), dec!(1))],
            asks: levels.iter().map(|&(p, q)| BookLevel::new(p, q)).collect(),
        }
    }

    fn ask(id: OrderId, price: Decimal, qty: Decimal) -> Order {
        Order {
            id,
            agent: AgentId(0),
            side: Side::Ask,
            price,
            quantity: qty,
            filled: Decimal::ZERO,
            status: OrderStatus::Open,
        }
    }

    fn buy(price: Decimal, qty: Decimal) -> Trade {
        Trade {
            timestamp: 5,
            price,
            quantity: qty,
            aggressor: AggressorSide::Buy,
        }
    }

    fn rules(mode: MatchingMode, trigger: FillTrigger) -> MatchRules {
        MatchRules {
            mode,
            trigger,
            fee_rate: Decimal::ZERO,
        }
    }

    #[test]
    fn better_injected_price_intercepts_then_depletes_history() {
        let snap = ask_book(&[(dec!(101), dec!(1.0))]);
        let mut book = WorkingBook::new(&snap);
        let orders = [ask(1, dec!(100.5), dec!(0.1))];
        let r = rules(MatchingMode::HistoricalFirst, FillTrigger::StrictCross);
        let fills = match_trade(&mut book, &orders, &buy(dec!(101), dec!(0.2)), &r);
        assert_eq!(fills.len(), 1);
        assert_eq!((fills[0].price, fills[0].quantity), (dec!(100.5), dec!(0.1)));
        assert_eq!(book.remaining(Side::Ask, 0), dec!(0.9));
    }

    #[test]
    fn equal_price_does_not_fill_under_strict_cross() {
        let snap = ask_book(&[(dec!(101), dec!(1.0))]);
        let mut book = WorkingBook::new(&snap);
        let orders = [ask(1, dec!(101), dec!(0.5))];
        let r = rules(MatchingMode::HistoricalFirst, FillTrigger::StrictCross);
        assert!(match_trade(&mut book, &orders, &buy(dec!(101), dec!(0.5)), &r).is_empty());
        assert_eq!(book.remaining(Side::Ask, 0), dec!(0.5));
    }

    #[test]
    fn touch_with_injected_priority_fills_at_equal_price() {
        let snap = ask_book(&[(dec!(101), dec!(1.0))]);
        let mut book = WorkingBook::new(&snap);
        let orders = [ask(1, dec!(101), dec!(0.5))];
        let r = rules(MatchingMode::InjectedFirst, FillTrigger::Touch);
        let fills = match_trade(&mut book, &orders, &buy(dec!(101), dec!(0.5)), &r);
        assert_eq!(fills.len(), 1);
        assert_eq!((fills[0].price, fills[0].quantity), (dec!(101), dec!(0.5)));
        assert_eq!(book.remaining(Side::Ask, 0), dec!(1.0));
    }

    #[test]
    fn touch_with_historical_priority_lets_history_absorb() {
        let snap = ask_book(&[(dec!(101), dec!(1.0))]);
        let mut book = WorkingBook::new(&snap);
        let orders = [ask(1, dec!(101), dec!(0.5))];
        let r = rules(MatchingMode::HistoricalFirst, FillTrigger::Touch);
        assert!(match_trade(&mut book, &orders, &buy(dec!(101), dec!(0.5)), &r).is_empty());
    }

    #[test]
    fn no_injected_orders_no_fills() {
        let snap = ask_book(&[(dec!(101), dec!(1.0))]);
        let mut book = WorkingBook::new(&snap);
        let r = MatchRules::default();
        assert!(match_trade(&mut book, &[], &buy(dec!(102), dec!(3)), &r).is_empty());
        // the whole side is swept
        assert_eq!(book.asks.level, 1);
    }

    #[test]
    fn injected_orders_queue_by_price_then_id() {
        let snap = ask_book(&[]);
        let mut book = WorkingBook::new(&snap);
        let orders = [
            ask(7, dec!(100.2), dec!(0.1)),
            ask(3, dec!(100.1), dec!(0.1)),
            ask(5, dec!(100.2), dec!(0.1)),
        ];
        let r = rules(MatchingMode::HistoricalFirst, FillTrigger::StrictCross);
        let ids: Vec<_> = match_trade(&mut book, &orders, &buy(dec!(101), dec!(0.25)), &r)
            .iter()
            .map(|f| (f.order_id, f.quantity))
            .collect();
        assert_eq!(ids, vec![(3, dec!(0.1)), (5, dec!(0.1)), (7, dec!(0.05))]);
    }

    #[test]
    fn fees_are_taken_in_received_asset() {
        let snap = ask_book(&[]);
        let mut book = WorkingBook::new(&snap);
        let orders = [ask(1, dec!(100), dec!(1))];
        let r = MatchRules {
            fee_rate: dec!(0.001),
            ..MatchRules::default()
        };
        let fills = match_trade(&mut book, &orders, &buy(dec!(101), dec!(1)), &r);
        assert_eq!(fills[0].fee, dec!(0.1));
        assert_eq!(fills[0].quote_delta(), dec!(99.9));
    }

    #[test]
    fn ask_walk_floors_to_asset_precision() {
        let asks = [BookLevel::new(dec!(3), dec!(50))];
        let w = walk_asks(&asks, dec!(1));
        assert_eq!(w.received, dec!(0.33333333));
        assert_eq!(w.spent, dec!(0.99999999));
        assert!(!w.exhausted);
        let w = walk_asks(&[BookLevel::new(dec!(100), dec!(0.1))], dec!(20));
        assert!(w.exhausted);
        assert_eq!(w.received, dec!(0.1));
    }

    #[test]
    fn bid_walk_runs_through_levels() {
        let bids = [BookLevel::new(dec!(100), dec!(0.1)), BookLevel::new(dec!(99), dec!(1))];
        let w = walk_bids(&bids, dec!(0.3));
        assert_eq!(w.received, dec!(10) + dec!(19.8));
        assert_eq!(w.executions.len(), 2);
        assert!(!w.exhausted);
        assert!(walk_bids(&bids, dec!(2)).exhausted);
    }
}
