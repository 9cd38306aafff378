//! Exponential integral `E1(z)` on the principal branch.
//!
//! Used to close the Cauchy integrals of exponentials over half-lines and
//! bounded intervals. The cut lies along the negative real axis.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this modulus the power series is used everywhere.
const SERIES_RADIUS: f64 = 4.0;
/// Close to the negative real axis the continued fraction stalls; the series
/// is still usable up to this modulus.
const NEG_AXIS_SERIES_RADIUS: f64 = 40.0;
const MAX_SERIES_TERMS: usize = 500;
const MAX_CF_ITERATIONS: usize = 20_000;

/// Side of the branch cut on which a negative real argument is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    /// `-x + i0`
    Above,
    /// `-x - i0`
    Below,
}

/// Principal-branch `E1(z) = ∫_z^∞ e^{-s}/s ds`.
///
/// Fails at `z = 0` and on the negative real axis, where [`exp_integral_on_cut`]
/// must be used with an explicit side.
pub fn exp_integral(z: Complex64) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain("E1 is singular at z = 0".into()));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("E1 argument not finite: {z}")));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::Domain(format!(
            "E1({z}) lies on the branch cut; use exp_integral_on_cut"
        )));
    }
    Ok(e1_principal(z))
}

/// `E1(-x ± i0)` for `x > 0`.
pub fn exp_integral_on_cut(x: f64, side: CutSide) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "cut evaluation needs a finite x > 0, got {x}"
        )));
    }
    let ei = real_ei(x);
    let im = match side {
        CutSide::Above => -std::f64::consts::PI,
        CutSide::Below => std::f64::consts::PI,
    };
    Ok(Complex64::new(-ei, im))
}

/// Evaluation without argument checks; callers guarantee `z` is finite, nonzero
/// and off the cut.
pub(crate) fn e1_principal(z: Complex64) -> Complex64 {
    let r = z.norm();
    let near_negative_axis = z.re < 0.0 && z.im.abs() < 0.5 * r;
    if r <= SERIES_RADIUS || (near_negative_axis && r <= NEG_AXIS_SERIES_RADIUS) {
        return e1_series(z);
    }
    match e1_continued_fraction(z) {
        Some(v) => v,
        None => e1_series(z),
    }
}

/// `E1(z) = -γ - ln z - Σ_{k≥1} (-z)^k / (k·k!)`
fn e1_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= -z / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// Modified Lentz evaluation of
/// `E1(z) = e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - …)))`.
fn e1_continued_fraction(z: Complex64) -> Option<Complex64> {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_CF_ITERATIONS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = d.inv();
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Some(h * (-z).exp());
        }
    }
    None
}

/// Real exponential integral `Ei(x)` for `x > 0`.
fn real_ei(x: f64) -> f64 {
    if x > 40.0 {
        // asymptotic: e^x/x Σ k!/x^k, truncated at the smallest term
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let next = term * k as f64 / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        return x.exp() / x * sum;
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib <= 1e-17 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}
