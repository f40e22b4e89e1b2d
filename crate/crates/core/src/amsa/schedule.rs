use super::AmsaError;
use crate::marketdata::Granularity;

/// Period boundaries `start, start + P, ...` in milliseconds, closed by
/// `end` when the last period is partial.
pub fn period_schedule(start: i64, end: i64, period_days: u32, granularity: Granularity) -> Result<Vec<i64>, AmsaError> {
    if period_days == 0 {
        return Err(AmsaError::InvalidConfig("period_days must be at least 1".into()));
    }
    let step = granularity.interval_ms();
    let period = i64::from(period_days) * granularity.intervals_per_day() * step;
    if (end - start) % step != 0 {
        return Err(AmsaError::Misaligned(format!(
            "run span [{start}, {end}) is not a whole number of {granularity} intervals"
        )));
    }
    if end - start < period {
        return Err(AmsaError::ShortSpan {
            span_ms: end - start,
            period_ms: period,
        });
    }
    let mut bounds: Vec<i64> = (0..).map(|k| start + k * period).take_while(|t| *t < end).collect();
    bounds.push(end);
    Ok(bounds)
}
