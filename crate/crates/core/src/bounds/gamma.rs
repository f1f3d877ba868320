use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// `x / ln(1 + x)`, continuously extended by 1 at `x = 0`.
pub fn forward(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / x.ln_1p()
    }
}

/// The `x ≥ 0` with `x / ln(x + 1) = y`, for `y ≥ 1`. `γ(1) = 0`.
pub fn gamma_fn(y: f64) -> Result<f64> {
    if y.is_nan() || y < 1.0 {
        return Err(Error::OutOfRange(format!("γ is defined for y ≥ 1, got {y}")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0f64;
    let mut hi = f64::max(4.0, y * y.ln_1p() * 4.0);
    while forward(hi) < y {
        hi *= 2.0;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if forward(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
