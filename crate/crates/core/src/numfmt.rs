//! Fixed-precision number rendering shared by CSV and JSON writers.

/// Significant digits used for all emitted numbers.
pub const SIG_DIGITS: usize = 12;

/// Rounds to `digits` significant digits. Non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    s.parse().unwrap_or(x)
}

/// `round_sig(x, SIG_DIGITS)` in shortest round-trip form; exponent form
/// outside `[1e-6, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x, SIG_DIGITS);
    let a = r.abs();
    if a != 0.0 && a.is_finite() && !(1e-6..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_significant_digits() {
        assert_eq!(round_sig(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_sig(123456.789, 3), 123000.0);
        assert_eq!(round_sig(-0.0, 5), 0.0);
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert!(round_sig(f64::INFINITY, 4).is_infinite());
        assert_eq!(fmt_num(1.5e-29), "1.5e-29");
        assert_eq!(fmt_num(2e20), "2e20");
        assert_eq!(fmt_num(0.0), "0");
    }
}
