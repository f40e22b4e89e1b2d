use super::{AgentAction, MarketView, Marketable};

/// Buy everything at the first refresh, sell everything at the last.
pub fn decide_hodler(view: &MarketView<'_>) -> AgentAction {
    let mut action = AgentAction::default();
    if view.is_first_refresh {
        action.marketable.push(Marketable::BuyAllQuote);
    }
    if view.is_last_refresh {
        action.marketable.push(Marketable::SellAllBase);
    }
    action
}
