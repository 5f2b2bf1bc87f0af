//! Time arithmetic. Timestamps are unsigned 64-bit nanosecond counts
//! (`s_ts` = 64); frequencies, periods, and deadline offsets are exact
//! rationals in Hz / seconds until engine configuration converts them once.

use crate::error::AnalysisError;
use num::rational::Ratio;
use num::{One, Signed, Zero};

/// Exact rational, used for frequencies (Hz) and durations (seconds).
pub type Rat = Ratio<i64>;

/// Timestamp width in bits.
pub const TS_BITS: u32 = 64;

pub const NS_PER_SEC: i64 = 1_000_000_000;

/// Converts an exact rational second count to nanoseconds, failing when the
/// value is not exactly representable on the nanosecond grid.
pub fn secs_to_ns(secs: Rat) -> Result<u64, AnalysisError> {
    let scaled = secs * Rat::from_integer(NS_PER_SEC);
    if !scaled.is_integer() || scaled.is_negative() {
        return Err(AnalysisError::OffGrid(format!("{secs} s")));
    }
    Ok(scaled.to_integer() as u64)
}

/// Period (seconds) of a frequency in Hz.
pub fn period_of(freq: Rat) -> Rat {
    Rat::one() / freq
}

pub fn rat_gcd(a: Rat, b: Rat) -> Rat {
    let num = num::integer::gcd(*a.numer() * *b.denom(), *b.numer() * *a.denom());
    Ratio::new(num, a.denom() * b.denom())
}

pub fn rat_lcm(a: Rat, b: Rat) -> Rat {
    a * b / rat_gcd(a, b)
}

/// True when `outer` is an integer multiple of `inner`.
pub fn is_integer_multiple(outer: Rat, inner: Rat) -> bool {
    if inner.is_zero() {
        return false;
    }
    (outer / inner).is_integer()
}

/// Renders a nanosecond timestamp as decimal seconds with trailing zeros
/// trimmed but at least one fractional digit, e.g. `2.5`, `1.0`,
/// `0.123456789`. Used for trigger logs, so the format must stay stable.
pub fn format_secs(ns: u64) -> String {
    let whole = ns / NS_PER_SEC as u64;
    let frac = ns % NS_PER_SEC as u64;
    if frac == 0 {
        return format!("{whole}.0");
    }
    let mut digits = format!("{frac:09}");
    while digits.ends_with('0') {
        digits.pop();
    }
    format!("{whole}.{digits}")
}

pub fn format_rat_secs(r: Rat) -> String {
    match secs_to_ns(r) {
        Ok(ns) => format_secs(ns),
        Err(_) => format!("{r}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ns_conversion_is_exact_or_fails() {
        assert_eq!(secs_to_ns(Rat::new(1, 2)).unwrap(), 500_000_000);
        assert_eq!(secs_to_ns(Rat::new(1, 5)).unwrap(), 200_000_000);
        assert!(secs_to_ns(Rat::new(1, 3)).is_err());
    }

    #[test]
    fn rational_lcm_of_periods() {
        // Periods of 2 Hz and 5 Hz streams: lcm(1/2, 1/5) = 1 s.
        let p2 = period_of(Rat::from_integer(2));
        let p5 = period_of(Rat::from_integer(5));
        assert_eq!(rat_lcm(p2, p5), Rat::one());
        // lcm(3/2, 1/2) = 3/2.
        assert_eq!(rat_lcm(Rat::new(3, 2), Rat::new(1, 2)), Rat::new(3, 2));
    }

    #[test]
    fn multiple_check() {
        assert!(is_integer_multiple(Rat::from_integer(10), Rat::from_integer(2)));
        assert!(!is_integer_multiple(Rat::from_integer(3), Rat::from_integer(2)));
    }

    #[test]
    fn second_formatting() {
        assert_eq!(format_secs(2_500_000_000), "2.5");
        assert_eq!(format_secs(1_000_000_000), "1.0");
        assert_eq!(format_secs(123_456_789), "0.123456789");
        assert_eq!(format_secs(0), "0.0");
    }
}
