//! Report assembly: JSON fragments with fixed numeric formatting.
//!
//! Report values are rounded to 6 significant digits before serialization
//! and maps serialize with sorted keys, so output bytes are a deterministic
//! function of inputs and flags. Threshold fields may be `-inf` (the
//! accept-all operating point); JSON has no representation for that, so
//! infinite thresholds serialize as the string `"-inf"`, matching the CSV
//! sentinel. CSV exports of curves and paths are written elsewhere at full
//! round-trip precision instead: they are plot/recompute data, not summary
//! figures.

use serde_json::{json, Value};
use teer::concurrent::ConcurrentPoint;

/// Round to 6 significant digits. Values with extreme exponents pass
/// through unchanged rather than risking overflow in the scaling factor.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-300..=300).contains(&exp) {
        return x;
    }
    let factor = 10f64.powi(5 - exp);
    (x * factor).round() / factor
}

/// JSON number rounded to 6 significant digits.
pub fn num(x: f64) -> Value {
    json!(sig6(x))
}

/// Threshold as JSON: a rounded number, or the `-inf` sentinel string.
pub fn threshold(x: f64) -> Value {
    if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        num(x)
    }
}

/// The concurrent-point JSON fragment.
pub fn concurrent_fragment(point: &ConcurrentPoint) -> Value {
    json!({
        "concurrent_teer": num(point.teer),
        "tau_asv": threshold(point.asv_threshold),
        "tau_cm": threshold(point.cm_threshold),
        "asv_index": point.asv_index,
        "cm_index": point.cm_index,
        "rate_spread": num(point.rate_spread),
        "xpoint_residual": num(point.xpoint_residual),
        "sign_changes": point.sign_changes,
        "warning": point.warning,
    })
}
