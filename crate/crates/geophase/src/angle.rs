//! Angle arguments: `45deg`, `0.3rad`, or bare radians.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, factor) = if let Some(v) = t.strip_suffix("deg") {
        (v, PI / 180.0)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("not an angle: {text:?} (use e.g. 45deg, 0.3rad or 0.3)"))?;
    if !value.is_finite() {
        return Err(format!("angle must be finite: {text:?}"));
    }
    Ok(value * factor)
}
