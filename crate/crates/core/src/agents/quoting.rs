use rust_decimal::Decimal;

use super::{ask_request, bid_request, AgentAction, AgentParams, MarketView, PureMmConfig, SkewedConfig};
use crate::exchange::mid_price;

/// Cancels everything and re-quotes one bid and one ask, each sized from the
/// whole inventory of its funding asset.
fn requote(bid_spread: Decimal, ask_spread: Decimal, params: &AgentParams, view: &MarketView<'_>) -> AgentAction {
    let mut action = AgentAction::default();
    let Ok(mid) = mid_price(view.snapshot) else {
        return action;
    };
    action.cancels = view.open_orders.iter().map(|o| o.id).collect();
    let quote = view.account.quote_total();
    let base = view.account.base_total();
    action.placements.extend(bid_request(mid, bid_spread, quote, params));
    action.placements.extend(ask_request(mid, ask_spread, base, params));
    action
}

pub fn decide_skewed(cfg: &SkewedConfig, params: &AgentParams, view: &MarketView<'_>) -> AgentAction {
    requote(cfg.bid_spread, cfg.ask_spread, params, view)
}

pub fn decide_puremm(cfg: &PureMmConfig, params: &AgentParams, view: &MarketView<'_>) -> AgentAction {
    requote(
        cfg.bid_level_pct / Decimal::ONE_HUNDRED,
        cfg.ask_level_pct / Decimal::ONE_HUNDRED,
        params,
        view,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::test_support::{book, view};
    use crate::exchange::{Account, AgentId, Order, OrderStatus, Side};
    use rust_decimal_macros::dec;

    #[test]
    fn skewed_quotes_both_sides_at_own_spreads() {
        let snap = book(dec!(99), dec!(101));
        let acc = Account::new(AgentId(3), dec!(2), dec!(1000));
        let cfg = SkewedConfig {
            bid_spread: dec!(0.01),
            ask_spread: dec!(0.03),
        };
        let a = decide_skewed(&cfg, &AgentParams::default(), &view(&snap, &acc, &[]));
        assert!(a.cancels.is_empty());
        assert_eq!(a.placements.len(), 2);
        assert_eq!((a.placements[0].side, a.placements[0].price), (Side::Bid, dec!(99)));
        assert_eq!(a.placements[0].quantity, dec!(10.10101010));
        assert_eq!((a.placements[1].side, a.placements[1].price), (Side::Ask, dec!(103)));
        assert_eq!(a.placements[1].quantity, dec!(2));
    }

    #[test]
    fn requote_cancels_and_counts_locked_funds() {
        let snap = book(dec!(99), dec!(101));
        let acc = Account {
            base_locked: dec!(1),
            quote_locked: dec!(500),
            ..Account::new(AgentId(3), dec!(0), dec!(0))
        };
        let orders: Vec<Order> = [(1, Side::Bid, dec!(500), dec!(1)), (2, Side::Ask, dec!(110), dec!(1))]
            .into_iter()
            .map(|(id, side, price, quantity)| Order {
                id,
                agent: AgentId(3),
                side,
                price,
                quantity,
                filled: dec!(0),
                status: OrderStatus::Open,
            })
            .collect();
        let cfg = PureMmConfig {
            bid_level_pct: dec!(0.5),
            ask_level_pct: dec!(3.4),
        };
        let a = decide_puremm(&cfg, &AgentParams::default(), &view(&snap, &acc, &orders));
        assert_eq!(a.cancels, vec![1, 2]);
        assert_eq!(a.placements[0].price, dec!(99.5));
        assert_eq!(a.placements[0].quantity, dec!(5.02512562));
        assert_eq!(a.placements[1].price, dec!(103.4));
        assert_eq!(a.placements[1].quantity, dec!(1));
    }

    #[test]
    fn one_sided_inventory_quotes_one_side() {
        let snap = book(dec!(99), dec!(101));
        let acc = Account::new(AgentId(3), dec!(0), dec!(1000));
        let cfg = SkewedConfig {
            bid_spread: dec!(0.01),
            ask_spread: dec!(0.01),
        };
        let a = decide_skewed(&cfg, &AgentParams::default(), &view(&snap, &acc, &[]));
        assert_eq!(a.placements.len(), 1);
        assert_eq!(a.placements[0].side, Side::Bid);
    }
}
