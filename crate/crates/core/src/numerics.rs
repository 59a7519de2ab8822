//! Special functions used by the closed-form analytics and the downlink
//! convexity analysis.
//!
//! `probability_integral` is the error function
//! `Φ(x) = (2/√π) ∫₀ˣ exp(−t²) dt`. Two evaluation routes are used: a
//! positive-term series for `|x| ≤ 3` and a continued fraction for the
//! complement above that. Both are accurate to a few ulp, well inside the
//! 1e-12 absolute budget.
//!
//! `lambert_w0` is the principal branch of the Lambert W function, restricted
//! to the interval `[−1/e, 0]` that the convexity threshold needs.

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_CUTOFF: f64 = 3.0;

/// Error function `Φ(x)`. Fails on NaN or infinite input.
pub fn probability_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("probability_integral", format!("non-finite argument {x}")));
    }
    Ok(erf(x))
}

/// Infallible form for callers that have already checked finiteness.
pub(crate) fn erf(x: f64) -> f64 {
    let a = x.abs();
    let v = if a <= SERIES_CUTOFF {
        erf_series(a)
    } else {
        1.0 - erfc_continued_fraction(a)
    };
    v.copysign(x)
}

// erf(x) = (2/√π) e^{−x²} Σ_k 2^k x^{2k+1} / (2k+1)!!
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let two_x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= two_x2 / (2.0 * k + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x * x).exp() * sum
}

// erfc(x) = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0,
// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

const W_TOL: f64 = 1e-13;
const W_MAX_ITERS: usize = 50;

/// Principal branch `W₀(x)` for `x ∈ [−1/e, 0]`.
///
/// Seeded by the branch-point expansion `−1 + p − p²/3 + 11p³/72` with
/// `p = √(2(ex + 1))` close to `−1/e`, by the Maclaurin series elsewhere, and
/// then polished with Halley steps.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp();
    if !x.is_finite() || x > 0.0 || x < branch * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::domain(
            "lambert_w0",
            format!("argument {x} outside [-1/e, 0]"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let p2 = 2.0 * (std::f64::consts::E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }
    let p = p2.sqrt();
    if p < 1e-9 {
        return Ok(-1.0 + p - p * p / 3.0);
    }
    let mut w = if p < 1.0 {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x - x * x + 1.5 * x * x * x
    };
    for _ in 0..W_MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= W_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
