//! Float helpers that `core` does not provide without `std`.

pub(crate) fn floor(x: f64) -> f64 {
    let t = x as i64 as f64;
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Nearest integer, halves rounded up.
pub(crate) fn round_half_up(x: f64) -> i64 {
    floor(x + 0.5) as i64
}
