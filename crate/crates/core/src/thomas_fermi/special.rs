//! Gamma and Beta functions on the real line.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `ln|Γ(x)|` and the sign of `Γ(x)`.
///
/// Returns a domain error at the poles `x = 0, -1, -2, ...`.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || is_pole(x) {
        return Err(Error::domain(format!("Gamma has a pole at {x}")));
    }
    if x < 0.5 {
        // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
        let s = (PI * x).sin();
        let (lg, _) = ln_gamma(1.0 - x)?;
        return Ok((PI.ln() - s.abs().ln() - lg, s.signum()));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let value = 0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln();
    Ok((value, 1.0))
}

pub fn gamma(x: f64) -> Result<f64> {
    let (lg, sign) = ln_gamma(x)?;
    Ok(sign * lg.exp())
}

/// `B(P, Q) = Γ(P) Γ(Q) / Γ(P + Q)`.
///
/// `P` must be positive; `Q` may be negative as long as neither `Q` nor
/// `P + Q` hits a pole of Gamma.
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("Beta requires P > 0, got {p}")));
    }
    let (la, sa) = ln_gamma(p)?;
    let (lb, sb) = ln_gamma(q)?;
    let (lc, sc) = ln_gamma(p + q)?;
    Ok(sa * sb * sc * (la + lb - lc).exp())
}

/// `B(P, Q)` from its defining integral `∫₀¹ x^{P-1} (1-x)^{Q-1} dx`.
/// Only meaningful for `P, Q > 0`.
pub fn beta_quadrature(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::domain(format!(
            "Beta integral diverges for P = {p}, Q = {q}"
        )));
    }
    let quad = tanh_sinh(
        |_, xa, xb| xa.powf(p - 1.0) * xb.powf(q - 1.0),
        0.0,
        1.0,
        1e-14,
    );
    Ok(quad.value)
}
