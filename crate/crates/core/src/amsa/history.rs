use std::io::Write;

use super::InventoryHistory;
use crate::num::{fmt_fixed, ASSET_SCALE};

pub const INVENTORY_HISTORY_HEADER: &str = "boundary_ts,agent_id,env,value_quote,roi_pct,alpha_pct,selected";

/// Fractional digits of per-boundary percentages.
const PCT_SCALE: u32 = 6;

/// Writes one line per agent result at each boundary, followed by a
/// `TOTAL` line for the chair whose `selected` column counts the agents
/// picked for the next period.
pub fn write_inventory_history<W: Write>(history: &InventoryHistory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{INVENTORY_HISTORY_HEADER}")?;
    for rec in &history.records {
        for r in &rec.results {
            let selected = rec.selected.binary_search(&r.agent).is_ok();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rec.timestamp,
                r.agent,
                r.env.as_str(),
                fmt_fixed(r.end_value, ASSET_SCALE),
                fmt_fixed(r.roi_pct, PCT_SCALE),
                fmt_fixed(r.alpha_pct, PCT_SCALE),
                u8::from(selected)
            )?;
        }
        writeln!(
            out,
            "{},TOTAL,real,{},{},{},{}",
            rec.timestamp,
            fmt_fixed(rec.chair_value, ASSET_SCALE),
            fmt_fixed(rec.chair_roi_pct, PCT_SCALE),
            fmt_fixed(rec.chair_alpha_pct, PCT_SCALE),
            rec.selected.len()
        )?;
    }
    Ok(())
}
