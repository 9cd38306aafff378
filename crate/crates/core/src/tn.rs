//! Time-normal averages of operators linear in vacuum modes.
//!
//! An operator is described by its mode amplitudes, `Ô(t) = Σ_κ f_κ(t)â_κ + h.c.`,
//! so that `⟨Ô₁(t₁)Ô₂(t₂)⟩ = Σ_κ f₁κ(t₁) f₂κ*(t₂)`. Every engine below is built
//! from that factorisation.
//!
//! * exact, rearranged: the closed-time-loop double projection collapsed to
//!   four half-line projections,
//!   `f₁(t₁)P⁺_{≤t₁}[f₂*](t₂) + f₁*(t₁)P⁻_{≤t₁}[f₂](t₂) + (1 ↔ 2)`;
//! * exact, direct: the four contour-ordered terms projected one variable at a
//!   time, the outer projection by principal-value quadrature;
//! * Kelley–Kleiner: project each operator first, order second;
//! * Wick: products of pairs over all perfect pairings.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::PiecewiseHarmonic;
use crate::oscillator::{
    heisenberg_pair, vacuum_two_point, FrequencySchedule, QuadratureOperator, Units,
};
use crate::projector::{
    cauchy_integral, freq_part, pv_project, truncated_freq_part, windowed_freq_part,
    ProjectorSign,
};
use crate::quadrature::{cauchy_pv, Periods, QuadratureControls};

use ProjectorSign::{Negative, Positive};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Relative accuracy credited to one closed-form projection.
const SEMI_ANALYTIC_REL_ERR: f64 = 1e-12;
/// Largest product handled by the pairing expansion.
pub const MAX_WICK_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    KelleyKleiner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Rearranged,
    Direct,
    Wick,
}

/// A time-normal average with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnResult {
    pub value: Complex64,
    pub method: Method,
    pub path: EvalPath,
    pub error_estimate: f64,
}

/// How single projections are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Backend {
    #[default]
    SemiAnalytic,
    Quadrature(QuadratureControls),
}

/// The four two-time vacuum functions entering the closed-time-loop product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderedCorrelator {
    /// `⟨T Ô₁(t₁)Ô₂(t₂)⟩`
    TimeOrdered,
    /// `⟨T̄ Ô₁(t₁)Ô₂(t₂)⟩`
    AntiTimeOrdered,
    /// `⟨Ô₁(t₁)Ô₂(t₂)⟩`
    LeftRight,
    /// `⟨Ô₂(t₂)Ô₁(t₁)⟩`
    RightLeft,
}

impl OrderedCorrelator {
    pub fn eval(
        self,
        op1: &QuadratureOperator,
        op2: &QuadratureOperator,
        t1: f64,
        t2: f64,
    ) -> Complex64 {
        let lr = vacuum_two_point(op1, op2, t1, t2);
        let rl = vacuum_two_point(op2, op1, t2, t1);
        match self {
            OrderedCorrelator::LeftRight => lr,
            OrderedCorrelator::RightLeft => rl,
            OrderedCorrelator::TimeOrdered => ordered(t1, t2, lr, rl),
            OrderedCorrelator::AntiTimeOrdered => ordered(t1, t2, rl, lr),
        }
    }
}

/// `later_first` when `t1 > t2`, `earlier_first` when `t1 < t2`, the mean at ties.
fn ordered(t1: f64, t2: f64, later_first: Complex64, earlier_first: Complex64) -> Complex64 {
    if t1 > t2 {
        later_first
    } else if t1 < t2 {
        earlier_first
    } else {
        0.5 * (later_first + earlier_first)
    }
}

fn check_modes(f1: &[PiecewiseHarmonic], f2: &[PiecewiseHarmonic]) -> Result<()> {
    if f1.len() != f2.len() {
        return Err(Error::InvalidInput(format!(
            "operators expand over {} and {} modes",
            f1.len(),
            f2.len()
        )));
    }
    Ok(())
}

fn periods_of(fs: &[&PiecewiseHarmonic]) -> Periods {
    let min = fs
        .iter()
        .filter_map(|f| f.min_nonzero_rate())
        .min_by(f64::total_cmp);
    let max = fs.iter().map(|f| f.max_rate()).fold(0.0, f64::max);
    Periods::from_rates(min, max)
}

fn singular_points(fs: &[&PiecewiseHarmonic], extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = fs
        .iter()
        .flat_map(|f| f.breakpoints().iter().copied())
        .chain(extra.iter().copied())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Rearranged exact pair for one mode, closed-form projections.
fn pair_exact_semi(f1: &PiecewiseHarmonic, f2: &PiecewiseHarmonic, t1: f64, t2: f64) -> Result<(Complex64, f64)> {
    let f1c = f1.conj();
    let f2c = f2.conj();
    let terms = [
        f1.eval(t1) * truncated_freq_part(&f2c, Positive, t2, t1)?,
        f1c.eval(t1) * truncated_freq_part(f2, Negative, t2, t1)?,
        f2.eval(t2) * truncated_freq_part(&f1c, Positive, t1, t2)?,
        f2c.eval(t2) * truncated_freq_part(f1, Negative, t1, t2)?,
    ];
    let scale: f64 = terms.iter().map(|z| z.norm()).sum();
    Ok((terms.iter().sum(), SEMI_ANALYTIC_REL_ERR * scale.max(1.0)))
}

/// Rearranged exact pair for one mode, projections by quadrature.
fn pair_exact_quadrature(
    f1: &PiecewiseHarmonic,
    f2: &PiecewiseHarmonic,
    t1: f64,
    t2: f64,
    controls: QuadratureControls,
) -> Result<(Complex64, f64)> {
    let periods = periods_of(&[f1, f2]);
    let (a1, a2) = (f1.eval(t1), f2.eval(t2));
    let pv = |g: &dyn Fn(f64) -> Complex64, at: f64, cut: f64| -> Result<(Complex64, f64)> {
        let pts = singular_points(&[f1, f2], &[cut]);
        let est = cauchy_pv(
            |x, out: &mut [Complex64]| out[0] = if x < cut { g(x) } else { ZERO },
            1,
            at,
            &pts,
            periods,
            controls,
        )?;
        Ok((Positive.kernel_prefactor() * est.values[0], est.error / (2.0 * PI)))
    };

    if t1 == t2 {
        let t = t1;
        let (b1, b2) = (f1.eval(t), f2.eval(t));
        let local = 0.5 * (b1 * b2.conj() + b1.conj() * b2);
        let h = |x: f64| {
            let (g1, g2) = (f1.eval(x), f2.eval(x));
            b1 * g2.conj() - b1.conj() * g2 + b2 * g1.conj() - b2.conj() * g1
        };
        let (p, err) = pv(&h, t, t)?;
        return Ok((local + p, err));
    }

    let weight = |inner: f64, upper: f64| if inner < upper { 0.5 } else { 0.0 };
    let local = weight(t2, t1) * (a1 * f2.eval(t2).conj() + a1.conj() * f2.eval(t2))
        + weight(t1, t2) * (a2 * f1.eval(t1).conj() + a2.conj() * f1.eval(t1));
    let g1 = |x: f64| {
        let g = f2.eval(x);
        a1 * g.conj() - a1.conj() * g
    };
    let g2 = |x: f64| {
        let g = f1.eval(x);
        a2 * g.conj() - a2.conj() * g
    };
    let (p1, e1) = pv(&g1, t2, t1)?;
    let (p2, e2) = pv(&g2, t1, t2)?;
    Ok((local + p1 + p2, e1 + e2))
}

/// Per-term breakdown of the direct path, in the order
/// `δ⁺δ⁺⟨T⟩`, `δ⁺δ⁻⟨Ô₂Ô₁⟩`, `δ⁻δ⁻⟨T̄⟩`, `δ⁻δ⁺⟨Ô₁Ô₂⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectTerms {
    pub terms: [Complex64; 4],
    pub error: f64,
}

/// Direct closed-time-loop expansion for one mode. The inner projection (over
/// the second time) is closed-form; the outer one is quadrature.
fn pair_exact_direct(
    f1: &PiecewiseHarmonic,
    f2: &PiecewiseHarmonic,
    t1: f64,
    t2: f64,
    controls: QuadratureControls,
) -> Result<DirectTerms> {
    if t1 == t2 {
        let comm = f1.eval(t1) * f2.eval(t1).conj() - f1.eval(t1).conj() * f2.eval(t1);
        if comm.norm() > 1e-12 {
            return Err(Error::SingularPoint { t: t1 });
        }
    }
    let f2c = f2.conj();
    let g2 = f2.eval(t2);
    let whole = |g: &PiecewiseHarmonic, s| windowed_freq_part(g, s, t2, f64::NEG_INFINITY, f64::INFINITY);
    let w_pos_f2c = whole(&f2c, Positive)?;
    let w_neg_f2 = whole(f2, Negative)?;
    let w_pos_f2 = whole(f2, Positive)?;
    let w_neg_f2c = whole(&f2c, Negative)?;
    let pre_p = Positive.kernel_prefactor();
    let pre_m = Negative.kernel_prefactor();

    // [H++, H+-, H--, H-+] at outer time τ
    let inner = |tau: f64, out: &mut [Complex64]| {
        let cz = cauchy_integral(f2, t2, f64::NEG_INFINITY, tau).value;
        let czc = cz.conj();
        let below = if t2 < tau {
            0.5
        } else if t2 == tau {
            0.25
        } else {
            0.0
        };
        let pos_le_f2c = below * g2.conj() + pre_p * czc;
        let neg_le_f2 = below * g2 + pre_m * cz;
        let pos_ge_f2 = w_pos_f2 - (below * g2 + pre_p * cz);
        let neg_ge_f2c = w_neg_f2c - (below * g2.conj() + pre_m * czc);
        let a = f1.eval(tau);
        let ac = a.conj();
        out[0] = a * pos_le_f2c + ac * pos_ge_f2;
        out[1] = ac * w_neg_f2;
        out[2] = ac * neg_le_f2 + a * neg_ge_f2c;
        out[3] = a * w_pos_f2c;
    };

    let mut at_t1 = [ZERO; 4];
    inner(t1, &mut at_t1);
    let pts = singular_points(&[f1, f2], &[t2]);
    let est = cauchy_pv(inner, 4, t1, &pts, periods_of(&[f1, f2]), controls)?;
    let signs = [Positive, Positive, Negative, Negative];
    let mut terms = [ZERO; 4];
    for k in 0..4 {
        terms[k] = 0.5 * at_t1[k] + signs[k].kernel_prefactor() * est.values[k];
    }
    Ok(DirectTerms {
        terms,
        error: est.error / (2.0 * PI),
    })
}

/// Kelley–Kleiner pair for one mode from the projected amplitudes
/// `F^±_k(t_k) = f_k^(±)(t_k)`.
fn pair_kk_from_parts(
    (p1, m1): (Complex64, Complex64),
    (p2, m2): (Complex64, Complex64),
    t1: f64,
    t2: f64,
) -> Complex64 {
    // Ô^(+) = F⁺â + (F⁻)*â†, Ô^(-) = F⁻â + (F⁺)*â†, ⟨(xâ + yâ†)(uâ + vâ†)⟩ = x·v
    let normal_12 = m1 * m2.conj();
    let normal_21 = m2 * m1.conj();
    let t_pos = ordered(t1, t2, p1 * m2.conj(), p2 * m1.conj());
    let t_neg = ordered(t1, t2, m2 * p1.conj(), m1 * p2.conj());
    normal_12 + normal_21 + t_pos + t_neg
}

fn projected_semi(f: &PiecewiseHarmonic, t: f64) -> Result<(Complex64, Complex64)> {
    Ok((
        freq_part(f, Positive)?.eval(t)?,
        freq_part(f, Negative)?.eval(t)?,
    ))
}

fn projected_quadrature(
    f: &PiecewiseHarmonic,
    t: f64,
    controls: QuadratureControls,
) -> Result<((Complex64, Complex64), f64)> {
    let p = pv_project(f, Positive, t, controls)?;
    let m = pv_project(f, Negative, t, controls)?;
    Ok(((p.value, m.value), p.error + m.error))
}

/// Mode-level exact pair, summed over modes.
pub fn pair_exact_modes(
    f1: &[PiecewiseHarmonic],
    f2: &[PiecewiseHarmonic],
    t1: f64,
    t2: f64,
    backend: Backend,
) -> Result<TnResult> {
    check_modes(f1, f2)?;
    let mut value = ZERO;
    let mut err = 0.0;
    for (a, b) in f1.iter().zip(f2) {
        let (v, e) = match backend {
            Backend::SemiAnalytic => pair_exact_semi(a, b, t1, t2)?,
            Backend::Quadrature(c) => pair_exact_quadrature(a, b, t1, t2, c)?,
        };
        value += v;
        err += e;
    }
    Ok(TnResult {
        value,
        method: Method::Exact,
        path: EvalPath::Rearranged,
        error_estimate: err,
    })
}

/// Mode-level Kelley–Kleiner pair, summed over modes.
pub fn pair_kk_modes(
    f1: &[PiecewiseHarmonic],
    f2: &[PiecewiseHarmonic],
    t1: f64,
    t2: f64,
    backend: Backend,
) -> Result<TnResult> {
    check_modes(f1, f2)?;
    let mut value = ZERO;
    let mut err = 0.0;
    for (a, b) in f1.iter().zip(f2) {
        let (pa, pb, e) = match backend {
            Backend::SemiAnalytic => {
                let pa = projected_semi(a, t1)?;
                let pb = projected_semi(b, t2)?;
                let scale = pa.0.norm() + pa.1.norm() + pb.0.norm() + pb.1.norm();
                (pa, pb, SEMI_ANALYTIC_REL_ERR * scale * scale)
            }
            Backend::Quadrature(c) => {
                let (pa, ea) = projected_quadrature(a, t1, c)?;
                let (pb, eb) = projected_quadrature(b, t2, c)?;
                let scale = pa.0.norm() + pa.1.norm() + pb.0.norm() + pb.1.norm();
                (pa, pb, 2.0 * (ea + eb) * scale)
            }
        };
        value += pair_kk_from_parts(pa, pb, t1, t2);
        err += e;
    }
    Ok(TnResult {
        value,
        method: Method::KelleyKleiner,
        path: EvalPath::Rearranged,
        error_estimate: err,
    })
}

/// Exact time-normal pair `⟨T:Ô₁(t₁)Ô₂(t₂):⟩` by the rearranged single-integral
/// form with closed-form projections. Equal times are the symmetric limit.
pub fn tn_pair_exact(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
) -> Result<TnResult> {
    tn_pair_exact_with(op1, op2, t1, t2, Backend::SemiAnalytic)
}

pub fn tn_pair_exact_with(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
    backend: Backend,
) -> Result<TnResult> {
    pair_exact_modes(&[op1.mode_amplitude()], &[op2.mode_amplitude()], t1, t2, backend)
}

/// Exact pair from the four-term closed-time-loop expansion, without the
/// rearrangement. Slow; used to validate [`tn_pair_exact`].
pub fn tn_pair_exact_direct(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
    controls: QuadratureControls,
) -> Result<TnResult> {
    let d = tn_pair_exact_direct_terms(op1, op2, t1, t2, controls)?;
    Ok(TnResult {
        value: d.terms.iter().sum(),
        method: Method::Exact,
        path: EvalPath::Direct,
        error_estimate: d.error,
    })
}

pub fn tn_pair_exact_direct_terms(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
    controls: QuadratureControls,
) -> Result<DirectTerms> {
    pair_exact_direct(&op1.mode_amplitude(), &op2.mode_amplitude(), t1, t2, controls)
}

/// Kelley–Kleiner approximation: frequency parts first, closed-time-loop
/// ordering second.
pub fn tn_pair_kk(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
) -> Result<TnResult> {
    tn_pair_kk_with(op1, op2, t1, t2, Backend::SemiAnalytic)
}

pub fn tn_pair_kk_with(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
    backend: Backend,
) -> Result<TnResult> {
    pair_kk_modes(&[op1.mode_amplitude()], &[op2.mode_amplitude()], t1, t2, backend)
}

/// Sum over perfect pairings of `items`, where `pair(i, j)` supplies a pair
/// value and its error. Returns the value and a first-order error estimate.
fn wick_sum(n: usize, pair: &[Vec<(Complex64, f64)>]) -> (Complex64, f64) {
    fn rec(
        remaining: &mut Vec<usize>,
        pair: &[Vec<(Complex64, f64)>],
        acc: Complex64,
        acc_err: f64,
    ) -> (Complex64, f64) {
        if remaining.is_empty() {
            return (acc, acc_err);
        }
        let first = remaining.remove(0);
        let mut total = ZERO;
        let mut err = 0.0;
        for idx in 0..remaining.len() {
            let other = remaining.remove(idx);
            let (v, e) = pair[first][other];
            let (sub, sub_err) = rec(
                remaining,
                pair,
                acc * v,
                acc_err * v.norm() + acc.norm() * e,
            );
            total += sub;
            err += sub_err;
            remaining.insert(idx, other);
        }
        remaining.insert(0, first);
        (total, err)
    }
    let mut idx: Vec<usize> = (0..n).collect();
    rec(&mut idx, pair, Complex64::new(1.0, 0.0), 0.0)
}

/// Exact `m`-point time-normal average in the Gaussian vacuum: the pairing
/// expansion of exact pairs. `m = 0` gives 1, odd `m` gives 0.
pub fn tn_multi_exact(ops: &[QuadratureOperator], times: &[f64]) -> Result<TnResult> {
    tn_multi_exact_with(ops, times, Backend::SemiAnalytic)
}

pub fn tn_multi_exact_with(
    ops: &[QuadratureOperator],
    times: &[f64],
    backend: Backend,
) -> Result<TnResult> {
    let amps: Vec<Vec<PiecewiseHarmonic>> = ops.iter().map(|o| vec![o.mode_amplitude()]).collect();
    multi_exact_modes(&amps, times, backend)
}

pub fn multi_exact_modes(
    amps: &[Vec<PiecewiseHarmonic>],
    times: &[f64],
    backend: Backend,
) -> Result<TnResult> {
    multi_modes(Method::Exact, amps, times, backend)
}

/// Kelley–Kleiner counterpart of [`tn_multi_exact`]: the pairing expansion of
/// Kelley–Kleiner pairs.
pub fn tn_multi_kk(ops: &[QuadratureOperator], times: &[f64]) -> Result<TnResult> {
    tn_multi_kk_with(ops, times, Backend::SemiAnalytic)
}

pub fn tn_multi_kk_with(
    ops: &[QuadratureOperator],
    times: &[f64],
    backend: Backend,
) -> Result<TnResult> {
    let amps: Vec<Vec<PiecewiseHarmonic>> = ops.iter().map(|o| vec![o.mode_amplitude()]).collect();
    multi_modes(Method::KelleyKleiner, &amps, times, backend)
}

fn multi_modes(
    method: Method,
    amps: &[Vec<PiecewiseHarmonic>],
    times: &[f64],
    backend: Backend,
) -> Result<TnResult> {
    let m = amps.len();
    if times.len() != m {
        return Err(Error::InvalidInput(format!(
            "{m} operators but {} times",
            times.len()
        )));
    }
    if m > MAX_WICK_ORDER {
        return Err(Error::InvalidInput(format!(
            "products of more than {MAX_WICK_ORDER} operators are not expanded (got {m})"
        )));
    }
    let result = |value, error_estimate| TnResult {
        value,
        method,
        path: EvalPath::Wick,
        error_estimate,
    };
    if m % 2 == 1 {
        return Ok(result(ZERO, 0.0));
    }
    if m == 0 {
        return Ok(result(Complex64::new(1.0, 0.0), 0.0));
    }
    let mut pair = vec![vec![(ZERO, 0.0); m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let r = match method {
                Method::Exact => pair_exact_modes(&amps[i], &amps[j], times[i], times[j], backend)?,
                Method::KelleyKleiner => pair_kk_modes(&amps[i], &amps[j], times[i], times[j], backend)?,
            };
            pair[i][j] = (r.value, r.error_estimate);
            pair[j][i] = pair[i][j];
        }
    }
    let (value, err) = wick_sum(m, &pair);
    Ok(result(value, err))
}

/// Which Heisenberg quadrature of the oscillator enters a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Momentum,
    Position,
}

fn build_ops(
    observables: &[Observable],
    schedule: &FrequencySchedule,
    units: &Units,
) -> Vec<QuadratureOperator> {
    let (p, x) = heisenberg_pair(schedule, units);
    observables
        .iter()
        .map(|o| match o {
            Observable::Momentum => p.clone(),
            Observable::Position => x.clone(),
        })
        .collect()
}

fn tn_for_schedule(
    method: Method,
    observables: &[Observable],
    times: &[f64],
    schedule: &FrequencySchedule,
    units: &Units,
    backend: Backend,
) -> Result<Complex64> {
    let ops = build_ops(observables, schedule, units);
    match method {
        Method::Exact => Ok(tn_multi_exact_with(&ops, times, backend)?.value),
        Method::KelleyKleiner => Ok(tn_multi_kk_with(&ops, times, backend)?.value),
    }
}

/// `|TN(schedule) - TN(modified)|` for the exact engine, where the schedules
/// must coincide up to the latest time argument.
pub fn no_peep_check(
    observables: &[Observable],
    times: &[f64],
    schedule: &FrequencySchedule,
    modified: &FrequencySchedule,
    units: &Units,
) -> Result<f64> {
    let latest = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !schedule.agrees_until(modified, latest) {
        return Err(Error::InvalidInput(format!(
            "schedules differ at or before the latest time argument {latest}"
        )));
    }
    if schedule == modified {
        return Ok(0.0);
    }
    schedule_sensitivity(
        Method::Exact,
        observables,
        times,
        schedule,
        modified,
        units,
        Backend::SemiAnalytic,
    )
}

/// `|TN(a) - TN(b)|` for either engine, with no restriction on where the
/// schedules differ.
pub fn schedule_sensitivity(
    method: Method,
    observables: &[Observable],
    times: &[f64],
    a: &FrequencySchedule,
    b: &FrequencySchedule,
    units: &Units,
    backend: Backend,
) -> Result<f64> {
    let va = tn_for_schedule(method, observables, times, a, units, backend)?;
    let vb = tn_for_schedule(method, observables, times, b, units, backend)?;
    Ok((va - vb).norm())
}
