//! Matrix execution, dataset generation, validation and report merging.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use amsa_core::agents::Family;
use amsa_core::amsa::{run_experiment, AmsaError, write_inventory_history, InventoryHistory, RunSummary};
use amsa_core::marketdata::{generate_synthetic, load_dir, validate_dataset, write_dataset, Granularity, MarketDataset, ValidationReport, BOOK_FILE};
use amsa_core::metrics::{emit_report, figure_tables, write_results_csv, CellKey, ReportRow, RESULTS_HEADER};
use log::{debug, info};
use rayon::prelude::*;
use rust_decimal::Decimal;

use crate::config::{Config, Market, MarketSource};
use crate::output::{create_file, write_atomic, write_dir_atomic};
use crate::CliError;

pub const RESULTS_FILE: &str = "results.csv";
pub const CELLS_DIR: &str = "cells";
pub const HISTORY_FILE: &str = "inventory_history.csv";
pub const AGENTS_FILE: &str = "agents.csv";
pub const FILLS_FILE: &str = "fills.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellOutcome {
    pub key: CellKey,
    pub dir: PathBuf,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixOutcome {
    /// In report order.
    pub cells: Vec<CellOutcome>,
    pub rows: Vec<ReportRow>,
}

pub fn cell_dir_name(key: &CellKey) -> String {
    format!("{}_{}_{}d_{}", key.market, key.family, key.period_days, key.granularity)
}

fn load_market(market: &Market, granularity: Granularity) -> Result<MarketDataset, CliError> {
    let ds = match &market.source {
        MarketSource::Directory(dir) => {
            let ds = load_dir(dir, None)?;
            if ds.granularity() != granularity {
                return Err(AmsaError::GranularityMismatch {
                    config: granularity,
                    data: ds.granularity(),
                }
                .into());
            }
            ds
        }
        MarketSource::Synthetic(regime) => generate_synthetic(regime, granularity)?,
    };
    debug!("market {}: {} snapshots, {} trades", market.name, ds.len(), ds.trades().len());
    Ok(ds)
}

/// Runs every (market, period, family) cell and writes the per-cell
/// histories, `results.csv` and one figure table per market under `out`.
pub fn run_matrix(cfg: &Config, data_dir: Option<&Path>, out: &Path) -> Result<MatrixOutcome, CliError> {
    let e = &cfg.experiment;
    let markets = cfg.markets(data_dir)?;
    let datasets: Vec<MarketDataset> = markets
        .par_iter()
        .map(|m| load_market(m, e.granularity))
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::new();
    for (mi, market) in markets.iter().enumerate() {
        for &period_days in &e.period_days {
            for &family in &e.families {
                let key = CellKey {
                    market: market.name.clone(),
                    family,
                    period_days,
                    granularity: e.granularity,
                };
                cells.push((mi, key));
            }
        }
    }
    let cells_root = out.join(CELLS_DIR);
    std::fs::create_dir_all(&cells_root).map_err(|err| CliError::io(&cells_root, err))?;
    info!("running {} cell(s) over {} market(s)", cells.len(), markets.len());

    let outcomes: Vec<(CellOutcome, ReportRow)> = cells
        .par_iter()
        .map(|(mi, key)| run_cell(cfg, &datasets[*mi], key, &cells_root))
        .collect::<Result<_, _>>()?;

    let expected: Vec<CellKey> = cells.into_iter().map(|c| c.1).collect();
    let rows = emit_report(outcomes.iter().map(|o| o.1.clone()).collect(), Some(&expected))?;
    write_tables(&rows, out)?;

    let mut cells: Vec<CellOutcome> = outcomes.into_iter().map(|o| o.0).collect();
    cells.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(MatrixOutcome { cells, rows })
}

fn run_cell(cfg: &Config, ds: &MarketDataset, key: &CellKey, cells_root: &Path) -> Result<(CellOutcome, ReportRow), CliError> {
    let (data_start, _) = ds
        .span()
        .ok_or_else(|| CliError::Usage(format!("market {} has no snapshots", key.market)))?;
    let exp = cfg.cell_config(key.family, key.period_days, data_start);
    let history = run_experiment(&exp, ds)?;
    let dir = cells_root.join(cell_dir_name(key));
    write_dir_atomic(&dir, |staging| write_cell(&history, staging, exp.record_fills))?;
    info!(
        "{key}: roi {} alpha {}",
        history.summary.roi_pct.round_dp(2),
        history.summary.alpha_pct.round_dp(2)
    );
    let row = ReportRow {
        market: key.market.clone(),
        family: key.family,
        period_days: key.period_days,
        granularity: key.granularity,
        roi_pct: history.summary.roi_pct,
        alpha_pct: history.summary.alpha_pct,
    };
    Ok((
        CellOutcome {
            key: key.clone(),
            dir,
            summary: history.summary,
        },
        row,
    ))
}

fn write_cell(history: &InventoryHistory, dir: &Path, with_fills: bool) -> Result<(), CliError> {
    let path = dir.join(HISTORY_FILE);
    let mut w = create_file(&path)?;
    write_inventory_history(history, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))?;

    let path = dir.join(AGENTS_FILE);
    let mut w = create_file(&path)?;
    let mut agents = String::from("agent_id,family,label\n");
    for (id, family, label) in &history.agents {
        agents.push_str(&format!("{id},{family},{label}\n"));
    }
    w.write_all(agents.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;

    if with_fills {
        let path = dir.join(FILLS_FILE);
        let mut w = create_file(&path)?;
        let io = |e| CliError::io(&path, e);
        writeln!(w, "timestamp_ms,agent_id,order_id,side,price,quantity,fee").map_err(io)?;
        for f in &history.fills {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                f.timestamp,
                f.agent,
                f.order_id,
                f.side.as_str(),
                f.price,
                f.quantity,
                f.fee.normalize()
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(())
}

fn write_tables(rows: &[ReportRow], out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_atomic(&out.join(RESULTS_FILE), |w| Ok(write_results_csv(rows, w)?))?;
    for table in figure_tables(rows) {
        write_atomic(&out.join(table.file_name()), |w| Ok(table.write_csv(w)?))?;
    }
    Ok(())
}

/// Writes every synthetic market of `cfg` as a dataset directory under
/// `out`. Markets backed by data directories are skipped.
pub fn generate_markets(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for market in cfg.markets(Some(Path::new("")))? {
        let MarketSource::Synthetic(regime) = &market.source else {
            info!("skipping {}: it reads existing data", market.name);
            continue;
        };
        let ds = generate_synthetic(regime, cfg.experiment.granularity)?;
        let dir = out.join(&market.name);
        write_dir_atomic(&dir, |staging| Ok(write_dataset(&ds, staging)?))?;
        info!("wrote {} ({} snapshots)", dir.display(), ds.len());
        written.push(dir);
    }
    Ok(written)
}

/// Validates `dir` itself when it holds a dataset, otherwise each child
/// directory that does, in name order.
pub fn validate_tree(dir: &Path, granularity: Option<Granularity>) -> Result<Vec<(String, ValidationReport)>, CliError> {
    let targets = if dir.join(BOOK_FILE).is_file() {
        vec![dir.to_path_buf()]
    } else {
        let mut subdirs = child_dirs(dir)?;
        subdirs.retain(|d| d.join(BOOK_FILE).is_file());
        subdirs
    };
    if targets.is_empty() {
        return Err(CliError::Usage(format!("no dataset found under {}", dir.display())));
    }
    targets
        .into_iter()
        .map(|d| {
            let ds = load_dir(&d, granularity)?;
            let name = d.file_name().map_or_else(|| d.display().to_string(), |n| n.to_string_lossy().into_owned());
            Ok((name, validate_dataset(&ds)))
        })
        .collect()
}

fn child_dirs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn parse_results(path: &Path) -> Result<Vec<ReportRow>, CliError> {
    let bad = |line: u64, m: String| CliError::Report(format!("{} line {line}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if header != RESULTS_HEADER {
        return Err(bad(1, format!("expected header {RESULTS_HEADER}")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let r = record.map_err(|e| bad(line, e.to_string()))?;
        if r.len() != 6 {
            return Err(bad(line, format!("expected 6 fields, found {}", r.len())));
        }
        let field = |k: usize, what: &str| bad(line, format!("invalid {what} {:?}", &r[k]));
        let decimal = |k: usize, what: &str| Decimal::from_str(&r[k]).map_err(|_| field(k, what));
        rows.push(ReportRow {
            market: r[0].to_string(),
            family: Family::from_str(&r[1]).map_err(|_| field(1, "family"))?,
            period_days: r[2].parse().map_err(|_| field(2, "period"))?,
            granularity: Granularity::from_str(&r[3]).map_err(|_| field(3, "granularity"))?,
            roi_pct: decimal(4, "roi")?,
            alpha_pct: decimal(5, "alpha")?,
        });
    }
    Ok(rows)
}

/// Merges `results.csv` from `root` and its immediate subdirectories into
/// one ordered table plus figure tables under `out`. Returns the row count.
pub fn merge_reports(root: &Path, out: &Path) -> Result<usize, CliError> {
    let mut sources: Vec<PathBuf> = std::iter::once(root.to_path_buf()).chain(child_dirs(root)?).map(|d| d.join(RESULTS_FILE)).collect();
    sources.retain(|p| p.is_file());
    if sources.is_empty() {
        return Err(CliError::Usage(format!("no {RESULTS_FILE} found under {}", root.display())));
    }
    let mut rows = Vec::new();
    for path in &sources {
        rows.extend(parse_results(path)?);
    }
    let rows = emit_report(rows, None)?;
    write_tables(&rows, out)?;
    Ok(rows.len())
}
