//! A free bosonic field as a finite mode sum, its retarded response, and the
//! field radiated by prescribed c-number currents.
//!
//! The field at label `x` is `Ê(x,t) = Σ_κ √ħ·u_κ(x)e^{-iω_κ t}â_κ + h.c.`; the
//! spatial argument is reduced to a finite set of labels.

use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicTerm, PiecewiseHarmonic};
use crate::oscillator::parse_bound;
use crate::tn::{pair_exact_modes, Backend};

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub omega: f64,
    /// `u_κ(x)` for each label `x`.
    pub amplitudes: Vec<Complex64>,
}

impl Mode {
    pub fn new(omega: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidInput(format!("mode frequency must be > 0, got {omega}")));
        }
        if amplitudes.is_empty() || amplitudes.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidInput("mode amplitudes must be finite and nonempty".into()));
        }
        Ok(Self { omega, amplitudes })
    }

    /// A mode seen at a single label.
    pub fn single(omega: f64, amplitude: Complex64) -> Result<Self> {
        Self::new(omega, vec![amplitude])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    hbar: f64,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>, hbar: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidInput("mode set is empty".into()));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidInput(format!("hbar must be > 0, got {hbar}")));
        }
        let labels = modes[0].amplitudes.len();
        if modes.iter().any(|m| m.amplitudes.len() != labels) {
            return Err(Error::InvalidInput("modes disagree on the number of labels".into()));
        }
        Ok(Self { modes, hbar })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn labels(&self) -> usize {
        self.modes[0].amplitudes.len()
    }

    fn check_label(&self, x: usize) -> Result<()> {
        if x >= self.labels() {
            return Err(Error::InvalidInput(format!(
                "label {x} out of range (mode set has {} labels)",
                self.labels()
            )));
        }
        Ok(())
    }

    /// `Σ_κ u_κ(x)u_κ*(x')e^{-iω_κ τ}`
    fn correlation(&self, x: usize, xp: usize, tau: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.amplitudes[x] * m.amplitudes[xp].conj() * Complex64::from_polar(1.0, -m.omega * tau))
            .sum()
    }

    /// Annihilator coefficients of `Ê(x,t)`, one per mode.
    pub fn field_amplitudes(&self, x: usize) -> Result<Vec<PiecewiseHarmonic>> {
        self.check_label(x)?;
        let s = self.hbar.sqrt();
        Ok(self
            .modes
            .iter()
            .map(|m| PiecewiseHarmonic::harmonic(vec![HarmonicTerm::new(s * m.amplitudes[x], m.omega)]))
            .collect())
    }
}

impl FromStr for ModeSet {
    type Err = Error;

    /// `hbar <value>` (optional, default 1) and one
    /// `mode <omega> <re u(0)> <im u(0)> [<re u(1)> <im u(1)> ...]` per mode.
    fn from_str(text: &str) -> Result<Self> {
        let mut hbar = 1.0;
        let mut modes = Vec::new();
        for (lineno, line) in config_lines(text) {
            let bad = |what: &str| Error::InvalidInput(format!("line {lineno}: {what}: '{}'", line.join(" ")));
            match line[0] {
                "hbar" if line.len() == 2 => hbar = parse_num(line[1]).ok_or_else(|| bad("bad hbar"))?,
                "mode" if line.len() >= 4 && line.len() % 2 == 0 => {
                    let omega = parse_num(line[1]).ok_or_else(|| bad("bad frequency"))?;
                    let amps = line[2..]
                        .chunks(2)
                        .map(|c| Some(Complex64::new(parse_num(c[0])?, parse_num(c[1])?)))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("bad amplitude"))?;
                    modes.push(Mode::new(omega, amps)?);
                }
                _ => return Err(bad("expected 'hbar <value>' or 'mode <omega> <re> <im> ...'")),
            }
        }
        ModeSet::new(modes, hbar)
    }
}

fn config_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn parse_num(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Retarded response `Δ_R(τ) = -2θ(τ)·Im Σ_κ u_κ(x)u_κ*(x')e^{-iω_κ τ}`, with
/// `θ(0) = 1`. Zero for every `τ < 0` by construction.
pub fn delta_r(ms: &ModeSet, (x, xp): (usize, usize), tau: f64) -> Result<f64> {
    ms.check_label(x)?;
    ms.check_label(xp)?;
    if tau < 0.0 {
        return Ok(0.0);
    }
    Ok(-2.0 * ms.correlation(x, xp, tau).im)
}

/// `⟨[Ê(x,t), Ê(x',t')]⟩` from the mode operators, using `[â_κ, â_λ†] = δ_κλ`.
pub fn field_commutator(ms: &ModeSet, (x, t): (usize, f64), (xp, tp): (usize, f64)) -> Result<Complex64> {
    let f = ms.field_amplitudes(x)?;
    let g = ms.field_amplitudes(xp)?;
    Ok(f.iter()
        .zip(&g)
        .map(|(a, b)| {
            let (a, b) = (a.eval(t), b.eval(tp));
            a * b.conj() - a.conj() * b
        })
        .sum())
}

/// Residual of `⟨[Ê(x,t), Ê(x',t')]⟩ = -iħ[Δ_R^{xx'}(t-t') - Δ_R^{x'x}(t'-t)]`.
pub fn wave_quantization_check(ms: &ModeSet, (x, xp): (usize, usize), t: f64, tp: f64) -> Result<f64> {
    let comm = field_commutator(ms, (x, t), (xp, tp))?;
    let response = delta_r(ms, (x, xp), t - tp)? - delta_r(ms, (xp, x), tp - t)?;
    Ok((comm + Complex64::new(0.0, ms.hbar * response)).norm())
}

/// A point source `weight·δ(t - time)` at one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub label: usize,
    pub time: f64,
    pub weight: f64,
}

/// A prescribed real c-number current: a piecewise-harmonic density per label
/// plus point impulses. Densities must vanish before their first breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCurrent {
    densities: Vec<PiecewiseHarmonic>,
    impulses: Vec<Impulse>,
}

impl ClassicalCurrent {
    pub fn new(densities: Vec<PiecewiseHarmonic>, impulses: Vec<Impulse>) -> Result<Self> {
        for (label, j) in densities.iter().enumerate() {
            let scale = j
                .pieces()
                .iter()
                .flatten()
                .map(|t| t.coeff.norm())
                .fold(0.0, f64::max);
            if !j.is_real(1e-12 * scale.max(1.0)) {
                return Err(Error::InvalidInput(format!("current at label {label} is not real")));
            }
            if !j.pieces()[0].is_empty() {
                return Err(Error::InvalidInput(format!(
                    "current at label {label} does not switch on at a finite time"
                )));
            }
        }
        for imp in &impulses {
            if imp.label >= densities.len() || !imp.time.is_finite() || !imp.weight.is_finite() {
                return Err(Error::InvalidInput(format!("bad impulse {imp:?}")));
            }
        }
        Ok(Self { densities, impulses })
    }

    pub fn zero(labels: usize) -> Self {
        Self {
            densities: vec![PiecewiseHarmonic::zero(); labels],
            impulses: Vec::new(),
        }
    }

    pub fn densities(&self) -> &[PiecewiseHarmonic] {
        &self.densities
    }

    pub fn impulses(&self) -> &[Impulse] {
        &self.impulses
    }

    pub fn labels(&self) -> usize {
        self.densities.len()
    }

    /// `labels <n>` first, then any number of
    /// `segment <label> <start> <end> <re c> <im c> <rate>` records, each adding
    /// `c·e^{-i·rate·t}` on `(start, end)`, and `impulse <label> <time> <weight>`
    /// records. `end` may be `+inf`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut densities: Option<Vec<PiecewiseHarmonic>> = None;
        let mut impulses = Vec::new();
        for (lineno, line) in config_lines(text) {
            let bad = |what: &str| Error::InvalidInput(format!("line {lineno}: {what}: '{}'", line.join(" ")));
            match (line[0], densities.as_mut()) {
                ("labels", None) if line.len() == 2 => {
                    let n: usize = line[1].parse().map_err(|_| bad("bad label count"))?;
                    densities = Some(vec![PiecewiseHarmonic::zero(); n]);
                }
                ("segment", Some(d)) if line.len() == 7 => {
                    let label: usize = line[1].parse().map_err(|_| bad("bad label"))?;
                    let nums = line[2..]
                        .iter()
                        .map(|t| parse_bound(t))
                        .collect::<Option<Vec<f64>>>()
                        .ok_or_else(|| bad("bad number"))?;
                    let (start, end) = (nums[0], nums[1]);
                    if label >= d.len() || !start.is_finite() || !(end > start) {
                        return Err(bad("bad segment"));
                    }
                    let term = HarmonicTerm::new(Complex64::new(nums[2], nums[3]), nums[4]);
                    let piece = if end.is_finite() {
                        PiecewiseHarmonic::new(vec![start, end], vec![vec![], vec![term], vec![]])?
                    } else {
                        PiecewiseHarmonic::switched_on(start, vec![term])
                    };
                    d[label] = d[label].add(&piece);
                }
                ("impulse", Some(_)) if line.len() == 4 => {
                    let label: usize = line[1].parse().map_err(|_| bad("bad label"))?;
                    let time = parse_num(line[2]).ok_or_else(|| bad("bad time"))?;
                    let weight = parse_num(line[3]).ok_or_else(|| bad("bad weight"))?;
                    impulses.push(Impulse { label, time, weight });
                }
                _ => return Err(bad("expected 'labels', 'segment' or 'impulse' record")),
            }
        }
        let densities = densities.ok_or_else(|| Error::InvalidInput("missing 'labels <n>' record".into()))?;
        Self::new(densities, impulses)
    }
}

/// `∫_{-∞}^{t} e^{-iω(t-t')} j(t') dt'` for a density vanishing before its
/// first breakpoint.
fn retarded_exponential(j: &PiecewiseHarmonic, omega: f64, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, b), terms) in j.intervals() {
        if terms.is_empty() || a >= t {
            continue;
        }
        let hi = b.min(t);
        for term in terms {
            let nu = omega - term.rate;
            let integral = if nu == 0.0 {
                Complex64::new(hi - a, 0.0)
            } else {
                (Complex64::from_polar(1.0, nu * hi) - Complex64::from_polar(1.0, nu * a)) / Complex64::new(0.0, nu)
            };
            acc += term.coeff * integral;
        }
    }
    acc * Complex64::from_polar(1.0, -omega * t)
}

/// Classical field radiated by the current, `Σ_{x'} ∫ Δ_R^{xx'}(t - t') J(x',t') dt'`.
pub fn classical_response(ms: &ModeSet, current: &ClassicalCurrent, x: usize, t: f64) -> Result<f64> {
    ms.check_label(x)?;
    if current.labels() != ms.labels() {
        return Err(Error::InvalidInput(format!(
            "current has {} labels, mode set {}",
            current.labels(),
            ms.labels()
        )));
    }
    // Δ_R(τ) = iθ(τ)Σ_κ (c_κ e^{-iωτ} - c.c.), c_κ = u_κ(x)u_κ*(x')
    let mut total = 0.0;
    for (xp, j) in current.densities.iter().enumerate() {
        for m in &ms.modes {
            let c = m.amplitudes[x] * m.amplitudes[xp].conj();
            let k_pos = retarded_exponential(j, m.omega, t);
            let k_neg = retarded_exponential(j, -m.omega, t);
            total += (Complex64::new(0.0, 1.0) * (c * k_pos - c.conj() * k_neg)).re;
        }
    }
    for imp in &current.impulses {
        total += imp.weight * delta_r(ms, (x, imp.label), t - imp.time)?;
    }
    Ok(total)
}

/// A field argument `Ê(label, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub label: usize,
    pub t: f64,
}

/// Time-normal average of a product of one or two driven fields
/// `Ê_H = Ê_free + E_cl`. The free part is evaluated by the exact engine; the
/// c-number part passes through the average unchanged.
pub fn driven_field_tn(ms: &ModeSet, current: &ClassicalCurrent, points: &[FieldPoint]) -> Result<Complex64> {
    let classical = points
        .iter()
        .map(|p| classical_response(ms, current, p.label, p.t))
        .collect::<Result<Vec<f64>>>()?;
    match points {
        // ⟨T:Ê_free:⟩ = 0
        [_] => Ok(Complex64::new(classical[0], 0.0)),
        [p, q] => {
            let free = pair_exact_modes(
                &ms.field_amplitudes(p.label)?,
                &ms.field_amplitudes(q.label)?,
                p.t,
                q.t,
                Backend::SemiAnalytic,
            )?;
            Ok(free.value + classical[0] * classical[1])
        }
        _ => Err(Error::InvalidInput(format!(
            "driven field averages are implemented for one or two fields, got {}",
            points.len()
        ))),
    }
}
