//! Frequency-positive and frequency-negative parts of piecewise-harmonic
//! functions.
//!
//! The kernels are `δ^(±)(t) = ±1/(2πi(t ∓ i0))`, realised as
//! `½δ(t) ± (1/2πi)·PV(1/t)`, so
//!
//! ```text
//! f^(±)(t) = f(t)/2 ± (1/2πi) PV ∫ f(t') / (t - t') dt'.
//! ```
//!
//! Over an interval `(a, b)` the Cauchy integral of `e^{-iωt'}` closes in
//! terms of `E1`; with `α = t - b`, `β = t - a`,
//!
//! ```text
//! PV ∫_a^b e^{-iωt'}/(t - t') dt' = e^{-iωt} [E1(-iωα) - E1(-iωβ) + iπ·sgn ω·1{α<0<β}].
//! ```
//!
//! When `t` sits on an integration endpoint the integral diverges like
//! `ln|t - endpoint|`; the windowed projections then return the finite part
//! (logarithm dropped at unit time scale). Only combinations whose logarithms
//! cancel, such as the equal-time time-normal pair, should consume those values.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::PiecewiseHarmonic;
use crate::quadrature::{cauchy_pv, Periods, QuadratureControls};
use crate::special::{e1_principal, EULER_GAMMA};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which half of the spectrum a projector keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorSign {
    /// `e^{-iωt}` with `ω > 0`
    Positive,
    Negative,
}

impl ProjectorSign {
    pub const BOTH: [ProjectorSign; 2] = [ProjectorSign::Positive, ProjectorSign::Negative];

    pub fn value(self) -> f64 {
        match self {
            ProjectorSign::Positive => 1.0,
            ProjectorSign::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            ProjectorSign::Positive => ProjectorSign::Negative,
            ProjectorSign::Negative => ProjectorSign::Positive,
        }
    }

    /// `±1/(2πi)`
    pub fn kernel_prefactor(self) -> Complex64 {
        Complex64::new(0.0, -self.value() / (2.0 * PI))
    }
}

/// Accumulated Cauchy integral together with the coefficients of the
/// logarithms that were dropped: `log_coeff` multiplies `ln|t - endpoint|`
/// (endpoint hit by `t`), `inf_coeff` multiplies `ln R` as `R → ∞`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CauchyParts {
    pub value: Complex64,
    pub log_coeff: Complex64,
    pub inf_coeff: Complex64,
}

/// `E1(-iωx)` with the endpoint conventions described in the module docs.
/// `x = 0` returns the finite part, `lower` telling which side the
/// integration range lies on.
#[inline]
fn e1_shifted(omega: f64, x: f64, lower: bool) -> Complex64 {
    if x.is_infinite() {
        return ZERO;
    }
    if x == 0.0 {
        let side = if lower { 0.5 } else { -0.5 };
        return Complex64::new(-EULER_GAMMA - omega.abs().ln(), side * PI * omega.signum());
    }
    e1_principal(Complex64::new(0.0, -omega * x))
}

/// `PV ∫_lo^hi f(t') / (t - t') dt'` for `lo < hi`, either possibly infinite.
pub(crate) fn cauchy_integral(f: &PiecewiseHarmonic, t: f64, lo: f64, hi: f64) -> CauchyParts {
    let mut parts = CauchyParts::default();
    for ((a0, b0), terms) in f.intervals() {
        let a = a0.max(lo);
        let b = b0.min(hi);
        if !(a < b) || terms.is_empty() {
            continue;
        }
        let alpha = t - b;
        let beta = t - a;
        for term in terms {
            let omega = term.rate;
            let phase = term.eval(t);
            if omega == 0.0 {
                let mut k = ZERO;
                for (x, sign) in [(beta, 1.0), (alpha, -1.0)] {
                    if x.is_infinite() {
                        parts.inf_coeff += phase * sign;
                    } else if x == 0.0 {
                        parts.log_coeff += phase * sign;
                    } else {
                        k += sign * x.abs().ln();
                    }
                }
                parts.value += phase * k;
            } else {
                let mut k = e1_shifted(omega, alpha, true) - e1_shifted(omega, beta, false);
                if alpha < 0.0 && beta > 0.0 {
                    k += I * PI * omega.signum();
                }
                if alpha == 0.0 {
                    parts.log_coeff -= phase;
                }
                if beta == 0.0 {
                    parts.log_coeff += phase;
                }
                parts.value += phase * k;
            }
        }
    }
    parts
}

fn coefficient_scale(f: &PiecewiseHarmonic) -> f64 {
    f.pieces()
        .iter()
        .flatten()
        .map(|t| t.coeff.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
}

/// `∫_lower^upper δ^(s)(t - t') f(t') dt'`.
///
/// The half-delta contributes `f(t)/2` strictly inside the window and `f/4`
/// (one-sided limit) when `t` equals an endpoint; in that case the principal
/// value is the finite part. Errors with [`Error::SingularPoint`] when `t`
/// hits a jump of `f` inside the window and with [`Error::Divergent`] when a
/// non-oscillatory unbounded piece makes the tail diverge.
pub fn windowed_freq_part(
    f: &PiecewiseHarmonic,
    s: ProjectorSign,
    t: f64,
    lower: f64,
    upper: f64,
) -> Result<Complex64> {
    if !(lower < upper) || t.is_nan() {
        return Err(Error::InvalidInput(format!(
            "empty projection window [{lower}, {upper}]"
        )));
    }
    let parts = cauchy_integral(f, t, lower, upper);
    let scale = coefficient_scale(f);
    if parts.inf_coeff.norm() > 1e-12 * scale {
        return Err(Error::Divergent(
            "constant tails do not cancel at infinity".into(),
        ));
    }
    let at_endpoint = t == lower || t == upper;
    if !at_endpoint && parts.log_coeff.norm() > 1e-12 * scale {
        return Err(Error::SingularPoint { t });
    }
    let local = if t == upper {
        0.25 * f.eval_left(t)
    } else if t == lower {
        0.25 * f.eval_right(t)
    } else if t > lower && t < upper {
        0.5 * f.eval(t)
    } else {
        ZERO
    };
    Ok(local + s.kernel_prefactor() * parts.value)
}

/// `∫_{-∞}^{upper} δ^(s)(t - t') f(t') dt'`, the half-line projection used by
/// the rearranged time-normal pair. At `t = upper` the delta carries weight
/// ¼ and the principal value is its finite part.
pub fn truncated_freq_part(
    f: &PiecewiseHarmonic,
    s: ProjectorSign,
    t: f64,
    upper: f64,
) -> Result<Complex64> {
    if !upper.is_finite() {
        return Err(Error::InvalidInput("truncation limit must be finite".into()));
    }
    windowed_freq_part(f, s, t, f64::NEG_INFINITY, upper)
}

/// `Σ_s ∫_{-∞}^{upper} δ^(s)(t - t') f(t') dt'`.
///
/// The principal values of the two signs cancel before evaluation, so this is
/// defined even where each half-line projection diverges: it is `f(t)` below
/// the limit, `f(t⁻)/2` on it and zero above.
pub fn truncated_kernel_sum(f: &PiecewiseHarmonic, t: f64, upper: f64) -> Complex64 {
    if t < upper {
        f.eval(t)
    } else if t == upper {
        0.5 * f.eval_left(t)
    } else {
        ZERO
    }
}

/// Extra factor multiplying `coeff·e^{-iωt}` in a [`SemiAnalyticTerm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialFactor {
    /// 1 on the open interval, 0 outside.
    Indicator { lo: f64, hi: f64 },
    /// `E1(-iω(t - anchor))`
    ExpIntegral { anchor: f64 },
    /// `ln|t - anchor|`, only for `ω = 0`
    Log { anchor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiAnalyticTerm {
    pub coeff: Complex64,
    pub rate: f64,
    pub factor: SpecialFactor,
}

impl SemiAnalyticTerm {
    fn eval(&self, t: f64) -> Complex64 {
        let base = self.coeff * Complex64::from_polar(1.0, -self.rate * t);
        match self.factor {
            SpecialFactor::Indicator { lo, hi } => {
                if t > lo && t < hi {
                    base
                } else {
                    ZERO
                }
            }
            SpecialFactor::ExpIntegral { anchor } => {
                base * e1_principal(Complex64::new(0.0, -self.rate * (t - anchor)))
            }
            SpecialFactor::Log { anchor } => base * (t - anchor).abs().ln(),
        }
    }
}

/// Image of a [`PiecewiseHarmonic`] under a frequency projector: exponentials
/// restricted to intervals plus exponential-integral and logarithm terms.
/// Defined everywhere except at the breakpoints of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiAnalyticFunction {
    terms: Vec<SemiAnalyticTerm>,
    singular_points: Vec<f64>,
    min_rate: Option<f64>,
    max_rate: f64,
}

impl SemiAnalyticFunction {
    pub fn terms(&self) -> &[SemiAnalyticTerm] {
        &self.terms
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn periods(&self) -> Periods {
        Periods::from_rates(self.min_rate, self.max_rate)
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if self.singular_points.contains(&t) {
            return Err(Error::SingularPoint { t });
        }
        Ok(self.terms.iter().map(|term| term.eval(t)).sum())
    }
}

/// `f^(s)(t) = ∫ δ^(s)(t - t') f(t') dt'` in closed form.
pub fn freq_part(f: &PiecewiseHarmonic, s: ProjectorSign) -> Result<SemiAnalyticFunction> {
    let pieces = f.pieces();
    let const_coeff = |p: &[crate::harmonic::HarmonicTerm]| {
        p.iter()
            .filter(|t| t.rate == 0.0)
            .map(|t| t.coeff)
            .sum::<Complex64>()
    };
    let first = const_coeff(&pieces[0]);
    let last = const_coeff(&pieces[pieces.len() - 1]);
    if (first - last).norm() > 1e-12 * coefficient_scale(f) {
        return Err(Error::Divergent(
            "constant tails do not cancel at infinity".into(),
        ));
    }

    let pre = s.kernel_prefactor();
    let mut terms = Vec::new();
    for ((a, b), piece) in f.intervals() {
        for term in piece {
            let (c, omega) = (term.coeff, term.rate);
            let local = if omega == 0.0 {
                0.5
            } else {
                0.5 * (1.0 + s.value() * omega.signum())
            };
            if local != 0.0 {
                terms.push(SemiAnalyticTerm {
                    coeff: c * local,
                    rate: omega,
                    factor: SpecialFactor::Indicator { lo: a, hi: b },
                });
            }
            // PV part: pre·c·e^{-iωt}·[F(t - b) - F(t - a)], F = E1(-iω·) or -ln|·|
            for (anchor, sign) in [(b, 1.0), (a, -1.0)] {
                if anchor.is_infinite() {
                    continue;
                }
                let factor = if omega == 0.0 {
                    SpecialFactor::Log { anchor }
                } else {
                    SpecialFactor::ExpIntegral { anchor }
                };
                let sign = if omega == 0.0 { -sign } else { sign };
                terms.push(SemiAnalyticTerm {
                    coeff: pre * c * sign,
                    rate: omega,
                    factor,
                });
            }
        }
    }
    Ok(SemiAnalyticFunction {
        terms,
        singular_points: f.breakpoints().to_vec(),
        min_rate: f.min_nonzero_rate(),
        max_rate: f.max_rate(),
    })
}

/// A numerically projected value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvValue {
    pub value: Complex64,
    pub error: f64,
}

/// Quadrature evaluation of `½g(t) + s/(2πi)·PV ∫ g(t')/(t - t') dt'` for an
/// arbitrary function. `singular_points` mark kinks, jumps or integrable
/// singularities of `g`.
pub fn pv_transform<G>(
    mut g: G,
    s: ProjectorSign,
    t: f64,
    singular_points: &[f64],
    periods: Periods,
    controls: QuadratureControls,
) -> Result<PvValue>
where
    G: FnMut(f64) -> Complex64,
{
    let local = 0.5 * g(t);
    let est = cauchy_pv(
        |x, out: &mut [Complex64]| out[0] = g(x),
        1,
        t,
        singular_points,
        periods,
        controls,
    )?;
    Ok(PvValue {
        value: local + s.kernel_prefactor() * est.values[0],
        error: est.error / (2.0 * PI),
    })
}

/// Independent quadrature oracle for [`freq_part`]: adaptive principal-value
/// integration on a finite window with a tapered, extrapolated cutoff.
pub fn pv_project(
    f: &PiecewiseHarmonic,
    s: ProjectorSign,
    t: f64,
    controls: QuadratureControls,
) -> Result<PvValue> {
    if f.breakpoints().contains(&t) {
        let jump = (f.eval_right(t) - f.eval_left(t)).norm();
        if jump > 1e-12 * coefficient_scale(f) {
            return Err(Error::SingularPoint { t });
        }
    }
    let periods = Periods::from_rates(f.min_nonzero_rate(), f.max_rate());
    pv_transform(|x| f.eval(x), s, t, f.breakpoints(), periods, controls)
}

/// Oracle for [`truncated_freq_part`]: [`pv_project`] applied to `f·θ(upper - t')`.
pub fn pv_project_truncated(
    f: &PiecewiseHarmonic,
    s: ProjectorSign,
    t: f64,
    upper: f64,
    controls: QuadratureControls,
) -> Result<PvValue> {
    if t == upper {
        return Err(Error::SingularPoint { t });
    }
    pv_project(&f.truncate_above(upper), s, t, controls)
}
