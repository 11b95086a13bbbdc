//! Deterministic number formatting for CSV and JSON output.

/// Round to 15 significant digits.
pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest round-trip decimal of `x` after rounding to 15 significant
/// digits. Very small or large magnitudes use exponent notation.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig15(x);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if !(1e-5..1e16).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(-1.5), "-1.5");
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(1e-20), "1e-20");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666666667");
    }
}
