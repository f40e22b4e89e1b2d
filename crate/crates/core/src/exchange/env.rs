use std::collections::HashMap;

use rust_decimal::Decimal;

use super::matching::{match_trade, walk_asks, walk_bids, BookCursor, WorkingBook};
use super::{Account, AgentId, Fill, MatchRules, Order, OrderId, OrderStatus, SimError, Side};
use crate::marketdata::{AggressorSide, OrderBookSnapshot, Trade};

#[derive(Debug, Clone)]
struct Slot {
    account: Account,
    orders: Vec<Order>,
}

/// Output of [`SimEnvironment::step_interval`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Fills grouped by agent (ascending id), execution order within an agent.
    pub fills: Vec<Fill>,
    /// End-of-interval depletion of each matched agent's private book copy,
    /// as `(agent, bid cursor, ask cursor)`.
    pub books: Vec<(AgentId, BookCursor, BookCursor)>,
}

/// Accounts, open orders and matching rules of one simulated venue.
///
/// Order ids are strictly increasing per environment; among injected orders
/// at the same price, a lower id has time priority.
#[derive(Debug, Clone)]
pub struct SimEnvironment {
    rules: MatchRules,
    slots: Vec<Slot>,
    next_order_id: OrderId,
    owners: HashMap<OrderId, AgentId>,
}

impl SimEnvironment {
    pub fn new(rules: MatchRules) -> Self {
        Self {
            rules,
            slots: Vec::new(),
            next_order_id: 1,
            owners: HashMap::new(),
        }
    }

    pub fn rules(&self) -> &MatchRules {
        &self.rules
    }

    fn slot_index(&self, agent: AgentId) -> Result<usize, SimError> {
        self.slots
            .binary_search_by_key(&agent, |s| s.account.agent)
            .map_err(|_| SimError::UnknownAgent(agent))
    }

    pub fn open_account(&mut self, agent: AgentId, base: Decimal, quote: Decimal) -> Result<(), SimError> {
        match self.slots.binary_search_by_key(&agent, |s| s.account.agent) {
            Ok(_) => Err(SimError::DuplicateAgent(agent)),
            Err(pos) => {
                self.slots.insert(
                    pos,
                    Slot {
                        account: Account::new(agent, base, quote),
                        orders: Vec::new(),
                    },
                );
                Ok(())
            }
        }
    }

    /// Removes an account that has no open orders and returns its balances.
    pub fn close_account(&mut self, agent: AgentId) -> Result<Account, SimError> {
        let i = self.slot_index(agent)?;
        if !self.slots[i].orders.is_empty() {
            return Err(SimError::OpenOrders(agent));
        }
        Ok(self.slots.remove(i).account)
    }

    pub fn account(&self, agent: AgentId) -> Option<&Account> {
        self.slot_index(agent).ok().map(|i| &self.slots[i].account)
    }

    /// Accounts in ascending agent id order.
    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.slots.iter().map(|s| &s.account)
    }

    pub fn agents(&self) -> Vec<AgentId> {
        self.slots.iter().map(|s| s.account.agent).collect()
    }

    pub fn open_orders(&self, agent: AgentId) -> &[Order] {
        self.slot_index(agent).map_or(&[], |i| &self.slots[i].orders)
    }

    pub fn order(&self, order_id: OrderId) -> Option<&Order> {
        let agent = self.owners.get(&order_id)?;
        self.open_orders(*agent).iter().find(|o| o.id == order_id)
    }

    /// Rests a limit order and locks the funds backing it.
    pub fn place_order(
        &mut self,
        agent: AgentId,
        side: Side,
        price: Decimal,
        quantity: Decimal,
    ) -> Result<OrderId, SimError> {
        if price <= Decimal::ZERO || quantity <= Decimal::ZERO {
            return Err(SimError::NonPositive { price, quantity });
        }
        let i = self.slot_index(agent)?;
        let account = &mut self.slots[i].account;
        match side {
            Side::Bid => {
                let needed = price * quantity;
                if account.quote_free < needed {
                    return Err(SimError::InsufficientFunds {
                        agent,
                        needed,
                        available: account.quote_free,
                    });
                }
                account.quote_free -= needed;
                account.quote_locked += needed;
            }
            Side::Ask => {
                if account.base_free < quantity {
                    return Err(SimError::InsufficientFunds {
                        agent,
                        needed: quantity,
                        available: account.base_free,
                    });
                }
                account.base_free -= quantity;
                account.base_locked += quantity;
            }
        }
        let id = self.next_order_id;
        self.next_order_id += 1;
        self.slots[i].orders.push(Order {
            id,
            agent,
            side,
            price,
            quantity,
            filled: Decimal::ZERO,
            status: OrderStatus::Open,
        });
        self.owners.insert(id, agent);
        Ok(id)
    }

    /// Cancels an open order and releases the funds of its unfilled part.
    pub fn cancel_order(&mut self, order_id: OrderId) -> Result<Order, SimError> {
        let agent = *self.owners.get(&order_id).ok_or(SimError::UnknownOrder(order_id))?;
        let i = self.slot_index(agent)?;
        let slot = &mut self.slots[i];
        let pos = slot
            .orders
            .iter()
            .position(|o| o.id == order_id)
            .ok_or(SimError::UnknownOrder(order_id))?;
        let mut order = slot.orders.remove(pos);
        self.owners.remove(&order_id);
        let rest = order.remaining();
        match order.side {
            Side::Bid => {
                let amount = order.price * rest;
                slot.account.quote_locked -= amount;
                slot.account.quote_free += amount;
            }
            Side::Ask => {
                slot.account.base_locked -= rest;
                slot.account.base_free += rest;
            }
        }
        order.status = OrderStatus::Cancelled;
        Ok(order)
    }

    pub fn cancel_all(&mut self, agent: AgentId) -> Result<(), SimError> {
        let ids: Vec<OrderId> = self.open_orders(agent).iter().map(|o| o.id).collect();
        for id in ids {
            self.cancel_order(id)?;
        }
        Ok(())
    }

    /// Cancels every open order of every agent.
    pub fn cancel_everything(&mut self) -> Result<(), SimError> {
        for agent in self.agents() {
            self.cancel_all(agent)?;
        }
        Ok(())
    }

    /// Executes a marketable order immediately against `snapshot`.
    ///
    /// A bid spends `amount` quote walking the asks; an ask sells `amount`
    /// base walking the bids. Whatever the visible depth cannot absorb stays
    /// in the account. Returns the resulting fills, one per level walked.
    pub fn execute_marketable(
        &mut self,
        agent: AgentId,
        side: Side,
        amount: Decimal,
        snapshot: &OrderBookSnapshot,
    ) -> Result<Vec<Fill>, SimError> {
        let i = self.slot_index(agent)?;
        let fee_rate = self.rules.fee_rate;
        let account = &mut self.slots[i].account;
        let available = match side {
            Side::Bid => account.quote_free,
            Side::Ask => account.base_free,
        };
        if amount > available {
            return Err(SimError::InsufficientFunds {
                agent,
                needed: amount,
                available,
            });
        }
        let walk = match side {
            Side::Bid => walk_asks(&snapshot.asks, amount),
            Side::Ask => walk_bids(&snapshot.bids, amount),
        };
        let mut fills = Vec::with_capacity(walk.executions.len());
        for (price, quantity) in walk.executions {
            let (fee, fill_side) = match side {
                Side::Bid => (fee_rate * quantity, Side::Bid),
                Side::Ask => (fee_rate * price * quantity, Side::Ask),
            };
            let fill = Fill {
                order_id: self.next_order_id,
                agent,
                side: fill_side,
                timestamp: snapshot.timestamp,
                price,
                quantity,
                fee,
            };
            self.next_order_id += 1;
            account.base_free += fill.base_delta();
            account.quote_free += fill.quote_delta();
            fills.push(fill);
        }
        Ok(fills)
    }

    /// Replays one interval's trades against every agent's injected orders.
    ///
    /// Each agent gets a fresh working copy of `snapshot`; historical
    /// depletion lasts until the end of the interval only.
    pub fn step_interval(&mut self, snapshot: &OrderBookSnapshot, trades: &[Trade]) -> StepReport {
        let mut report = StepReport::default();
        let rules = self.rules;
        for slot in &mut self.slots {
            if slot.orders.is_empty() {
                continue;
            }
            let mut book = WorkingBook::new(snapshot);
            for trade in trades {
                let maker = match trade.aggressor {
                    AggressorSide::Buy => Side::Ask,
                    AggressorSide::Sell => Side::Bid,
                };
                // Depletion of a side only matters while orders rest on it.
                if !slot.orders.iter().any(|o| o.side == maker) {
                    continue;
                }
                let fills = match_trade(&mut book, &slot.orders, trade, &rules);
                for fill in fills {
                    apply_fill(slot, &fill, &mut self.owners);
                    report.fills.push(fill);
                }
                if slot.orders.is_empty() {
                    break;
                }
            }
            report.books.push((slot.account.agent, book.bids, book.asks));
        }
        report
    }
}

fn apply_fill(slot: &mut Slot, fill: &Fill, owners: &mut HashMap<OrderId, AgentId>) {
    let pos = slot
        .orders
        .iter()
        .position(|o| o.id == fill.order_id)
        .expect("fill refers to an open order of this agent");
    let account = &mut slot.account;
    match fill.side {
        Side::Bid => {
            account.quote_locked -= fill.price * fill.quantity;
            account.base_free += fill.quantity - fill.fee;
        }
        Side::Ask => {
            account.base_locked -= fill.quantity;
            account.quote_free += fill.price * fill.quantity - fill.fee;
        }
    }
    let order = &mut slot.orders[pos];
    order.filled += fill.quantity;
    if order.filled == order.quantity {
        order.status = OrderStatus::Filled;
        owners.remove(&order.id);
        slot.orders.remove(pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{FillTrigger, MatchingMode};
    use crate::marketdata::BookLevel;
    use rust_decimal_macros::dec;

    const A: AgentId = AgentId(1);

    fn env(fee: Decimal) -> SimEnvironment {
        SimEnvironment::new(MatchRules {
            mode: MatchingMode::HistoricalFirst,
            trigger: FillTrigger::StrictCross,
            fee_rate: fee,
        })
    }

    fn snapshot() -> OrderBookSnapshot {
        OrderBookSnapshot {
            timestamp: 0,
            bids: vec![BookLevel::new(dec!(97), dec!(1))],
            asks: vec![BookLevel::new(dec!(103), dec!(1))],
        }
    }

    fn trade(side: AggressorSide, price: Decimal, qty: Decimal) -> Trade {
        Trade {
            timestamp: 1,
            price,
            quantity: qty,
            aggressor: side,
        }
    }

    #[test]
    fn placing_a_bid_locks_quote() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(0), dec!(1000)).unwrap();
        e.place_order(A, Side::Bid, dec!(100), dec!(1.0)).unwrap();
        let acc = e.account(A).unwrap();
        assert_eq!((acc.quote_free, acc.quote_locked), (dec!(900), dec!(100)));
    }

    #[test]
    fn insufficient_base_is_rejected() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(0.05), dec!(0)).unwrap();
        let err = e.place_order(A, Side::Ask, dec!(100), dec!(0.1)).unwrap_err();
        assert!(matches!(err, SimError::InsufficientFunds { .. }));
        assert_eq!(e.account(A).unwrap().base_free, dec!(0.05));
    }

    #[test]
    fn non_positive_orders_are_rejected() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(1), dec!(1000)).unwrap();
        assert!(e.place_order(A, Side::Bid, dec!(0), dec!(1)).is_err());
        assert!(e.place_order(A, Side::Ask, dec!(100), dec!(-1)).is_err());
    }

    #[test]
    fn order_ids_increase() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(1), dec!(1000)).unwrap();
        let a = e.place_order(A, Side::Bid, dec!(100), dec!(1)).unwrap();
        let b = e.place_order(A, Side::Ask, dec!(110), dec!(1)).unwrap();
        assert!(b > a);
    }

    #[test]
    fn cancel_releases_unfilled_part() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(0), dec!(1000)).unwrap();
        let id = e.place_order(A, Side::Bid, dec!(100), dec!(1.0)).unwrap();
        e.cancel_order(id).unwrap();
        assert_eq!(e.account(A).unwrap().quote_free, dec!(1000));
        assert_eq!(e.cancel_order(id), Err(SimError::UnknownOrder(id)));
    }

    #[test]
    fn cancel_after_half_fill_releases_half() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(0), dec!(100)).unwrap();
        let id = e.place_order(A, Side::Bid, dec!(100), dec!(1.0)).unwrap();
        let snap = snapshot();
        e.step_interval(&snap, &[trade(AggressorSide::Sell, dec!(99), dec!(0.5))]);
        let before = e.account(A).unwrap().quote_free;
        e.cancel_order(id).unwrap();
        assert_eq!(e.account(A).unwrap().quote_free - before, dec!(50));
        assert_eq!(e.account(A).unwrap().base_free, dec!(0.5));
    }

    #[test]
    fn empty_interval_changes_nothing() {
        let mut e = env(dec!(0.001));
        e.open_account(A, dec!(1), dec!(1000)).unwrap();
        e.place_order(A, Side::Bid, dec!(99), dec!(1)).unwrap();
        let before = e.account(A).unwrap().clone();
        let report = e.step_interval(&snapshot(), &[]);
        assert!(report.fills.is_empty());
        assert_eq!(e.account(A).unwrap(), &before);
    }

    #[test]
    fn crossing_sell_fills_injected_bid_with_fee() {
        let fee = dec!(0.001);
        let mut e = env(fee);
        e.open_account(A, dec!(0), dec!(99)).unwrap();
        e.place_order(A, Side::Bid, dec!(99), dec!(1.0)).unwrap();
        let report = e.step_interval(&snapshot(), &[trade(AggressorSide::Sell, dec!(98), dec!(1.0))]);
        assert_eq!(report.fills.len(), 1);
        let acc = e.account(A).unwrap();
        assert_eq!(acc.base_free, dec!(1.0) * (dec!(1) - fee));
        assert_eq!(acc.quote_locked, dec!(0));
        assert!(e.open_orders(A).is_empty());
    }

    #[test]
    fn two_buys_fill_an_ask_in_two_steps() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(0.5), dec!(0)).unwrap();
        let id = e.place_order(A, Side::Ask, dec!(100.5), dec!(0.5)).unwrap();
        let snap = snapshot();
        let t = trade(AggressorSide::Buy, dec!(101), dec!(0.3));
        let report = e.step_interval(&snap, &[t.clone(), t]);
        let qtys: Vec<_> = report.fills.iter().map(|f| (f.order_id, f.quantity)).collect();
        assert_eq!(qtys, vec![(id, dec!(0.3)), (id, dec!(0.2))]);
        assert!(e.order(id).is_none());
        assert_eq!(e.account(A).unwrap().quote_free, dec!(50.25));
    }

    #[test]
    fn marketable_buy_walks_asks() {
        let fee = dec!(0.001);
        let mut e = env(fee);
        e.open_account(A, dec!(0), dec!(3000)).unwrap();
        let snap = OrderBookSnapshot {
            timestamp: 0,
            bids: vec![BookLevel::new(dec!(99), dec!(50))],
            asks: vec![BookLevel::new(dec!(100), dec!(50))],
        };
        let fills = e.execute_marketable(A, Side::Bid, dec!(3000), &snap).unwrap();
        assert_eq!(fills.len(), 1);
        let acc = e.account(A).unwrap();
        assert_eq!(acc.base_free, dec!(30) * (dec!(1) - fee));
        assert_eq!(acc.quote_free, dec!(0));
    }

    #[test]
    fn close_account_requires_no_open_orders() {
        let mut e = env(dec!(0));
        e.open_account(A, dec!(1), dec!(0)).unwrap();
        e.place_order(A, Side::Ask, dec!(100), dec!(1)).unwrap();
        assert_eq!(e.close_account(A), Err(SimError::OpenOrders(A)));
        e.cancel_everything().unwrap();
        assert_eq!(e.close_account(A).unwrap().base_free, dec!(1));
    }
}
