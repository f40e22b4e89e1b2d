mod support;

use std::fs;

use amsa_core::marketdata::*;
use rust_decimal::Decimal;
use rust_decimal_macros::dec;

fn small_spec(seed: u64) -> RegimeSpec {
    RegimeSpec {
        trend: Trend::Bull,
        duration: 96,
        seed,
        levels: 5,
        ..RegimeSpec::default()
    }
}

#[test]
fn csv_round_trip_is_byte_exact() {
    let ds = generate_synthetic(&small_spec(3), Granularity::Hour).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_dataset(&ds, a.path()).unwrap();
    let loaded = load_dir(a.path(), None).unwrap();
    assert_eq!(loaded.granularity(), Granularity::Hour);
    assert_eq!(loaded.snapshots(), ds.snapshots());
    assert_eq!(loaded.trades(), ds.trades());
    assert_eq!(loaded.candles(), ds.candles());
    write_dataset(&loaded, b.path()).unwrap();
    for f in [TRADES_FILE, BOOK_FILE, CANDLES_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn generator_is_deterministic_per_seed() {
    let x = generate_synthetic(&small_spec(11), Granularity::Minute).unwrap();
    let y = generate_synthetic(&small_spec(11), Granularity::Minute).unwrap();
    let z = generate_synthetic(&small_spec(12), Granularity::Minute).unwrap();
    assert_eq!(x.snapshots(), y.snapshots());
    assert_eq!(x.trades(), y.trades());
    assert_ne!(x.trades(), z.trades());
}

#[test]
fn generator_output_is_valid_and_hits_its_drift() {
    for trend in [Trend::Bull, Trend::Bear, Trend::Flat] {
        for vol in [Volatility::Low, Volatility::High] {
            let spec = RegimeSpec {
                trend,
                volatility: vol,
                duration: 1440,
                seed: 5,
                ..RegimeSpec::default()
            };
            let ds = generate_synthetic(&spec, Granularity::Minute).unwrap();
            let report = validate_dataset(&ds);
            assert!(report.is_clean(), "{trend:?}/{vol:?}: {report}");
            assert_eq!(ds.len(), 1440);
            assert_eq!(ds.trades().len(), 14_400);
            // Book mids are within half a cent of the generated mid path,
            // whose end points are pinned exactly.
            let first = amsa_core::exchange::mid_price(&ds.snapshots()[0]).unwrap();
            let last = amsa_core::exchange::mid_price(ds.snapshots().last().unwrap()).unwrap();
            let target = spec.start_price * (Decimal::ONE + spec.total_drift());
            assert!((first - spec.start_price).abs() <= dec!(0.005), "{first}");
            assert!((last - target).abs() <= dec!(0.005), "{last} vs {target}");
        }
    }
}

#[test]
fn noiseless_path_is_monotone() {
    let spec = RegimeSpec {
        trend: Trend::Bear,
        noise: Some(0.0),
        duration: 1440,
        ..RegimeSpec::default()
    };
    let ds = generate_synthetic(&spec, Granularity::Minute).unwrap();
    let mids: Vec<Decimal> = ds
        .snapshots()
        .iter()
        .map(|s| amsa_core::exchange::mid_price(s).unwrap())
        .collect();
    assert!(mids.windows(2).all(|w| w[1] <= w[0]));
    assert!(ds.trades().iter().all(|t| t.aggressor == AggressorSide::Sell));
}

#[test]
fn inconsistent_regime_is_rejected() {
    let spec = RegimeSpec {
        trend: Trend::Bull,
        drift: Some(dec!(-0.1)),
        ..RegimeSpec::default()
    };
    assert!(matches!(generate_synthetic(&spec, Granularity::Hour), Err(DataError::Regime(_))));
}

fn write_min_dir(dir: &std::path::Path, book_rows: &[String], trade_rows: &[&str]) {
    let mut book = book_header();
    book.push('\n');
    for r in book_rows {
        book.push_str(r);
        book.push('\n');
    }
    fs::write(dir.join(BOOK_FILE), book).unwrap();
    let mut trades = format!("{TRADES_HEADER}\n");
    for r in trade_rows {
        trades.push_str(r);
        trades.push('\n');
    }
    fs::write(dir.join(TRADES_FILE), trades).unwrap();
}

fn book_row(ts: i64, bid: &str, ask: &str) -> String {
    let mut row = format!("{ts},{bid},1");
    row.push_str(&",,".repeat(MAX_LEVELS - 1));
    row.push_str(&format!(",{ask},1"));
    row.push_str(&",,".repeat(MAX_LEVELS - 1));
    row
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let rows = [book_row(0, "99", "101"), book_row(60_000, "99", "101")];
    write_min_dir(dir.path(), &rows, &["0,100,0.5,buy", "10,abc,0.5,sell"]);
    let err = load_dir(dir.path(), Some(Granularity::Minute)).unwrap_err();
    match err {
        DataError::Malformed { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn crossed_book_and_regressing_timestamps_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_min_dir(dir.path(), &[book_row(0, "102", "101")], &[]);
    assert!(matches!(
        load_dir(dir.path(), Some(Granularity::Minute)),
        Err(DataError::CrossedBook { line: 2, .. })
    ));
    let rows = [book_row(60_000, "99", "101"), book_row(0, "99", "101")];
    write_min_dir(dir.path(), &rows, &[]);
    assert!(matches!(
        load_dir(dir.path(), Some(Granularity::Minute)),
        Err(DataError::TimestampRegression { line: 3, .. })
    ));
}

#[test]
fn slicing_keeps_interval_trades_aligned() {
    let ds = generate_synthetic(&small_spec(1), Granularity::Hour).unwrap();
    let (start, _) = ds.span().unwrap();
    let h = Granularity::Hour.interval_ms();
    let part = slice_dataset(&ds, start + 10 * h, start + 20 * h).unwrap();
    assert_eq!(part.len(), 10);
    assert_eq!(part.interval_trades(0), ds.interval_trades(10));
    assert_eq!(part.interval_trades(9), ds.interval_trades(19));
    assert!(validate_dataset(&part).is_clean());
}

#[test]
fn validation_finds_gaps_in_hand_built_data() {
    let g = Granularity::Hour;
    let mut prices = vec![dec!(100); 6];
    prices[3] = dec!(101);
    let full = support::path_dataset(g, &prices, dec!(1));
    let mut snaps = full.snapshots().to_vec();
    snaps.remove(2);
    let gappy = MarketDataset::new(g, snaps, Vec::new(), Vec::new());
    let report = validate_dataset(&gappy);
    assert_eq!(report.findings.len(), 1);
    assert_eq!(report.findings[0].rule, Rule::Gap);
}
