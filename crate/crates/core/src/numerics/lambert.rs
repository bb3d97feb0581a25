use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-12;

/// Principal branch of the Lambert W function on `[0, ∞)`: the `w ≥ 0` with
/// `w·eʷ = x`.
///
/// Halley iteration seeded with `ln(1 + x)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            op: "lambert_w0",
            name: "x",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = x.ln_1p();
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= TOL * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w.max(0.0))
}
