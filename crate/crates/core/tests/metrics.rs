mod support;

use amsa_core::agents::Family;
use amsa_core::marketdata::Granularity;
use amsa_core::metrics::*;
use rust_decimal::Decimal;
use rust_decimal_macros::dec;
use support::{path_dataset, ramp};

#[test]
fn reference_on_a_locked_path() {
    let ds = path_dataset(Granularity::Hour, &ramp(0, 24, dec!(100), dec!(110)), dec!(1000));
    assert_eq!(hodler_reference(&ds, (dec!(0.1), dec!(10)), Decimal::ZERO).unwrap(), dec!(10));
    let bear = path_dataset(Granularity::Hour, &ramp(0, 24, dec!(100), dec!(80.9)), dec!(1000));
    assert_eq!(hodler_reference(&bear, (dec!(0.1), dec!(10)), Decimal::ZERO).unwrap(), dec!(-19.1));
    // fee is charged once on the buy (in base) and once on the sell (in quote)
    let fee = dec!(0.001);
    let with_fee = hodler_reference(&ds, (dec!(0.1), dec!(10)), fee).unwrap();
    let base = dec!(0.1) + dec!(0.1) * (Decimal::ONE - fee);
    let end = base * dec!(110) * (Decimal::ONE - fee);
    assert_eq!(with_fee, (end - dec!(20)) / dec!(20) * dec!(100));
}

#[test]
fn shallow_books_are_reported() {
    let ds = path_dataset(Granularity::Hour, &ramp(0, 4, dec!(100), dec!(100)), dec!(0.01));
    assert!(matches!(
        hodler_reference(&ds, (dec!(0), dec!(1000)), Decimal::ZERO),
        Err(MetricsError::InsufficientDepth { side: "ask", .. })
    ));
    let empty = ds.slice(0, 1).unwrap_or_else(|_| path_dataset(Granularity::Hour, &[], dec!(1)));
    assert!(matches!(hodler_reference(&empty, (dec!(1), dec!(1)), Decimal::ZERO), Err(MetricsError::EmptySlice)));
}

fn row(market: &str, family: Family, period: u32, roi: Decimal, alpha: Decimal) -> ReportRow {
    ReportRow {
        market: market.into(),
        family,
        period_days: period,
        granularity: Granularity::Minute,
        roi_pct: roi,
        alpha_pct: alpha,
    }
}

#[test]
fn report_is_ordered_and_complete() {
    let rows = vec![
        row("bear", Family::Skewed, 2, dec!(-1.234), dec!(0.5)),
        row("bear", Family::Base, 2, dec!(-2), dec!(-0.5)),
        row("bear", Family::Base, 1, dec!(-3.005), dec!(0.125)),
    ];
    let keys: Vec<CellKey> = rows
        .iter()
        .map(|r| CellKey {
            market: r.market.clone(),
            family: r.family,
            period_days: r.period_days,
            granularity: r.granularity,
        })
        .collect();
    let ordered = emit_report(rows.clone(), Some(&keys)).unwrap();
    let order: Vec<(Family, u32)> = ordered.iter().map(|r| (r.family, r.period_days)).collect();
    assert_eq!(order, vec![(Family::Base, 1), (Family::Base, 2), (Family::Skewed, 2)]);

    let err = emit_report(rows[1..].to_vec(), Some(&keys)).unwrap_err();
    assert_eq!(err.to_string(), "missing result cells: bear/skewed/2d/minute");
    assert!(matches!(emit_report(vec![rows[0].clone(), rows[0].clone()], None), Err(MetricsError::DuplicateCell(_))));

    let mut buf = Vec::new();
    write_results_csv(&ordered, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "market,family,period_days,granularity,roi_pct,alpha_pct\n\
         bear,base,1,minute,-3.01,0.13\n\
         bear,base,2,minute,-2.00,-0.50\n\
         bear,skewed,2,minute,-1.23,0.50\n"
    );

    let tables = figure_tables(&ordered);
    assert_eq!(tables.len(), 1);
    assert_eq!(tables[0].file_name(), "figure_bear_minute.csv");
    let mut buf = Vec::new();
    tables[0].write_csv(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "period_days,base,skewed,hodler\n1,-3.01,,-3.13\n2,-2.00,-1.23,-1.50\n"
    );
}
