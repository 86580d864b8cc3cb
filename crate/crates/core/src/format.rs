//! Deterministic text formatting for reports.

use crate::scalar::Real;

/// Seventeen significant digits in scientific notation (round-trips `f64`).
pub fn fmt_float<T: Real>(x: T) -> String {
    fmt_f64(x.to_f64_lossy())
}

pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalizes −0.
        return format!("{:.16e}", 0.0f64);
    }
    format!("{x:.16e}")
}

/// Rounds through the 17-digit text form so JSON output is stable.
pub fn json_f64(x: f64) -> serde_json::Value {
    if x.is_finite() {
        let v: f64 = fmt_f64(x).parse().unwrap_or(x);
        serde_json::Value::from(v)
    } else {
        serde_json::Value::String(x.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
    }
}
