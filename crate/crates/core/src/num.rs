//! Fixed-point helpers on top of [`Decimal`].

use rust_decimal::prelude::*;
use rust_decimal::RoundingStrategy;

/// Fractional digits used for base and quote asset amounts.
pub const ASSET_SCALE: u32 = 8;

/// Smallest representable amount at `scale` fractional digits.
pub fn tick(scale: u32) -> Decimal {
    Decimal::new(1, scale)
}

/// Rounds toward negative infinity at `scale` digits.
pub fn floor_to(value: Decimal, scale: u32) -> Decimal {
    value.round_dp_with_strategy(scale, RoundingStrategy::ToNegativeInfinity)
}

/// Rounds toward positive infinity at `scale` digits.
pub fn ceil_to(value: Decimal, scale: u32) -> Decimal {
    value.round_dp_with_strategy(scale, RoundingStrategy::ToPositiveInfinity)
}

/// Half-away-from-zero rounding used for reported percentages.
pub fn round_half_up(value: Decimal, scale: u32) -> Decimal {
    value.round_dp_with_strategy(scale, RoundingStrategy::MidpointAwayFromZero)
}

/// Rounds at `scale` and renders with exactly `scale` fractional digits.
pub fn fmt_fixed(value: Decimal, scale: u32) -> String {
    let mut v = round_half_up(value, scale);
    v.rescale(scale);
    if v.is_zero() {
        v.set_sign_positive(true);
    }
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rust_decimal_macros::dec;

    #[test]
    fn directional_rounding() {
        assert_eq!(floor_to(dec!(1.239), 2), dec!(1.23));
        assert_eq!(ceil_to(dec!(1.231), 2), dec!(1.24));
        assert_eq!(floor_to(dec!(-1.231), 2), dec!(-1.24));
        assert_eq!(tick(8), dec!(0.00000001));
    }

    #[test]
    fn fixed_rendering() {
        assert_eq!(fmt_fixed(dec!(-19.1), 2), "-19.10");
        assert_eq!(fmt_fixed(dec!(10), 6), "10.000000");
        assert_eq!(fmt_fixed(dec!(-0.001), 2), "0.00");
        assert_eq!(fmt_fixed(dec!(0.125), 2), "0.13");
    }
}
