//! Numeric rendering shared by the exports and the CLI.
//!
//! Reals are rounded to 9 significant digits before they are printed:
//! enough to verify 1e-9 tolerances, few enough that the textual form
//! is stable across platforms. Infinite sentinels render as `-inf` and
//! `inf` strings.

/// Round to 9 significant digits. Infinities pass through unchanged.
pub fn sig9(value: f64) -> f64 {
    if !value.is_finite() {
        return value;
    }
    format!("{value:.8e}").parse().expect("sig9 reparse")
}

/// Text form of a real at 9 significant digits.
pub fn sig9_str(value: f64) -> String {
    if value == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    if value == f64::INFINITY {
        return "inf".to_string();
    }
    format!("{}", sig9(value))
}

/// JSON form: a number at 9 significant digits, or a string for the
/// infinite sentinels.
pub fn sig9_json(value: f64) -> serde_json::Value {
    if value.is_finite() {
        serde_json::Number::from_f64(sig9(value))
            .map(serde_json::Value::Number)
            .expect("finite real")
    } else {
        serde_json::Value::String(sig9_str(value))
    }
}
