use crate::error::{Error, Result};

/// Principal branch of the Lambert W function on `[0, inf)`.
///
/// Halley iteration from `ln(1 + x)`, falling back to a halved step whenever
/// the residual grows.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::OutOfDomain(format!(
            "lambert_w0 needs finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let residual = |w: f64| w * w.exp() - x;
    let mut w = x.ln_1p();
    let mut r = residual(w);
    for _ in 0..100 {
        let ew = w.exp();
        let wp1 = w + 1.0;
        // Halley: f = w e^w - x, f' = e^w (w+1), f'' = e^w (w+2)
        let step = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1));
        let mut next = w - step;
        let mut next_r = residual(next);
        let mut damp = 1.0;
        while next_r.abs() > r.abs() && damp > 1e-6 {
            damp *= 0.5;
            next = w - damp * step;
            next_r = residual(next);
        }
        if next == w || next_r.abs() >= r.abs() {
            break;
        }
        w = next;
        r = next_r;
        if r == 0.0 {
            break;
        }
    }
    Ok(w)
}
