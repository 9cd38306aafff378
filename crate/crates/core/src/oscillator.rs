//! Harmonic oscillator with a piecewise-constant frequency, started in the
//! vacuum of `ω₀`.
//!
//! Heisenberg operators are linear in the Schrödinger pair,
//! `Ô(t) = A(t)·p̂ + B(t)·x̂`, with `A`, `B` built by chaining 2×2 symplectic
//! transfer matrices across the segments of the schedule. The Schrödinger and
//! Heisenberg pictures coincide at the first frequency switch (or at `t = 0`
//! for an unswitched oscillator), so a change of the schedule never affects
//! the operators at earlier times.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicTerm, PiecewiseHarmonic};

/// Physical scales. Everything defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub omega0: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            omega0: 1.0,
        }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64, omega0: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("omega0", omega0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { hbar, mass, omega0 })
    }

    /// `2π/ω₀`
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    /// `ħmω₀`, the unit of momentum-squared averages.
    pub fn momentum_scale(&self) -> f64 {
        self.hbar * self.mass * self.omega0
    }
}

/// Constant-frequency stretch `(start, end)` of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub omega: f64,
}

/// Contiguous cover of the real line by constant-frequency segments.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySchedule {
    segments: Vec<Segment>,
}

impl FrequencySchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidSchedule("no segments".into()))?;
        if first.start != f64::NEG_INFINITY {
            return Err(Error::InvalidSchedule(
                "first segment must start at -inf".into(),
            ));
        }
        if segments.last().map(|s| s.end) != Some(f64::INFINITY) {
            return Err(Error::InvalidSchedule("last segment must end at +inf".into()));
        }
        for s in &segments {
            if !(s.omega > 0.0) || !s.omega.is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "frequency must be finite and > 0, got {}",
                    s.omega
                )));
            }
            if !(s.start < s.end) {
                return Err(Error::InvalidSchedule(format!(
                    "empty segment ({}, {})",
                    s.start, s.end
                )));
            }
        }
        for w in segments.windows(2) {
            if w[0].end != w[1].start {
                return Err(Error::InvalidSchedule(format!(
                    "segments not contiguous at {} / {}",
                    w[0].end, w[1].start
                )));
            }
        }
        Ok(Self { segments })
    }

    /// Unswitched oscillator.
    pub fn constant(omega: f64) -> Result<Self> {
        Self::new(vec![Segment {
            start: f64::NEG_INFINITY,
            end: f64::INFINITY,
            omega,
        }])
    }

    /// Frequency halved on `(0, 2T₀)`, `T₀ = 2π/ω₀`, restored afterwards.
    pub fn halved_pulse(units: &Units) -> Self {
        let w = units.omega0;
        let t_end = 2.0 * units.period();
        Self {
            segments: vec![
                Segment { start: f64::NEG_INFINITY, end: 0.0, omega: w },
                Segment { start: 0.0, end: t_end, omega: 0.5 * w },
                Segment { start: t_end, end: f64::INFINITY, omega: w },
            ],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.end <= t);
        self.segments[idx.min(self.segments.len() - 1)].omega
    }

    /// Copy with the frequency replaced by `omega` for all `t > at`.
    pub fn with_switch(&self, at: f64, omega: f64) -> Result<Self> {
        let mut segs: Vec<Segment> = Vec::new();
        for s in &self.segments {
            if s.end <= at {
                segs.push(*s);
            } else if s.start < at {
                segs.push(Segment { end: at, ..*s });
            }
        }
        segs.push(Segment {
            start: at,
            end: f64::INFINITY,
            omega,
        });
        Self::new(segs)
    }

    /// Whether both schedules have the same frequency everywhere on `(-∞, t)`.
    pub fn agrees_until(&self, other: &Self, t: f64) -> bool {
        let mut edges: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(other.breakpoints())
            .filter(|&b| b < t)
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges.insert(0, f64::NEG_INFINITY);
        edges.push(t);
        edges.windows(2).all(|w| {
            let probe = if w[0].is_finite() { 0.5 * (w[0] + w[1]) } else { w[1] - 1.0 };
            self.omega_at(probe) == other.omega_at(probe)
        })
    }
}

pub(crate) fn parse_bound(tok: &str) -> Option<f64> {
    match tok {
        "-inf" => Some(f64::NEG_INFINITY),
        "+inf" | "inf" => Some(f64::INFINITY),
        _ => tok.parse().ok(),
    }
}

impl FromStr for FrequencySchedule {
    type Err = Error;

    /// One `start end omega` record per line; `#` starts a comment and
    /// `-inf`/`+inf` mark the unbounded ends.
    fn from_str(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidSchedule(format!("line {}: expected 'start end omega', got '{line}'", lineno + 1));
            if toks.len() != 3 {
                return Err(bad());
            }
            let start = parse_bound(toks[0]).ok_or_else(bad)?;
            let end = parse_bound(toks[1]).ok_or_else(bad)?;
            let omega: f64 = toks[2].parse().map_err(|_| bad())?;
            segments.push(Segment { start, end, omega });
        }
        Self::new(segments)
    }
}

/// Heisenberg operator `A(t)·p̂ + B(t)·x̂`; `A` is dimensionless, `B` carries
/// mass × frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureOperator {
    pub coeff_p: PiecewiseHarmonic,
    pub coeff_x: PiecewiseHarmonic,
    pub units: Units,
}

impl QuadratureOperator {
    /// `(A(t), B(t))`
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        (self.coeff_p.eval(t).re, self.coeff_x.eval(t).re)
    }

    /// Coefficient `f(t)` of the vacuum annihilator in
    /// `Ô(t) = f(t)·â + f*(t)·â†`, where `â` annihilates the `ω₀` vacuum.
    pub fn mode_amplitude(&self) -> PiecewiseHarmonic {
        let u = &self.units;
        let p_amp = Complex64::new(0.0, -(0.5 * u.hbar * u.mass * u.omega0).sqrt());
        let x_amp = Complex64::new((0.5 * u.hbar / (u.mass * u.omega0)).sqrt(), 0.0);
        self.coeff_p.scale(p_amp).add(&self.coeff_x.scale(x_amp))
    }
}

/// Second moments of the `ω₀` vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumMoments {
    pub xx: f64,
    pub pp: f64,
    pub xp: Complex64,
    pub px: Complex64,
}

impl VacuumMoments {
    pub fn new(units: &Units) -> Self {
        let Units { hbar, mass, omega0 } = *units;
        Self {
            xx: hbar / (2.0 * mass * omega0),
            pp: 0.5 * hbar * mass * omega0,
            xp: Complex64::new(0.0, 0.5 * hbar),
            px: Complex64::new(0.0, -0.5 * hbar),
        }
    }
}

/// Row vectors `(coeff of p̂, coeff of x̂)` of the momentum and position.
#[derive(Debug, Clone, Copy)]
struct PhaseState {
    p: [f64; 2],
    x: [f64; 2],
}

impl PhaseState {
    const IDENTITY: Self = Self {
        p: [1.0, 0.0],
        x: [0.0, 1.0],
    };

    fn evolve(&self, omega: f64, mass: f64, tau: f64) -> Self {
        let (s, c) = (omega * tau).sin_cos();
        let mw = mass * omega;
        let mut out = *self;
        for k in 0..2 {
            out.p[k] = self.p[k] * c - mw * self.x[k] * s;
            out.x[k] = self.x[k] * c + self.p[k] / mw * s;
        }
        out
    }
}

/// `P·cos ω(t - r) + Q·sin ω(t - r)` as exponentials.
fn oscillation_terms(p: f64, q: f64, omega: f64, r: f64) -> Vec<HarmonicTerm> {
    let plus = Complex64::from_polar(1.0, omega * r) * Complex64::new(p, q) * 0.5;
    vec![
        HarmonicTerm::new(plus, omega),
        HarmonicTerm::new(plus.conj(), -omega),
    ]
}

/// Heisenberg momentum and position for a schedule.
pub fn heisenberg_pair(
    schedule: &FrequencySchedule,
    units: &Units,
) -> (QuadratureOperator, QuadratureOperator) {
    let segs = schedule.segments();
    let anchor = if segs.len() > 1 { segs[0].end } else { 0.0 };
    let m = units.mass;

    let mut refs: Vec<(f64, PhaseState)> = Vec::with_capacity(segs.len());
    refs.push((anchor, PhaseState::IDENTITY));
    for k in 1..segs.len() {
        let (r_prev, st_prev) = refs[k - 1];
        let start = segs[k].start;
        refs.push((start, st_prev.evolve(segs[k - 1].omega, m, start - r_prev)));
    }

    let breakpoints = schedule.breakpoints();
    let mut pieces: [Vec<Vec<HarmonicTerm>>; 4] = Default::default();
    for (seg, &(r, st)) in segs.iter().zip(&refs) {
        let w = seg.omega;
        let mw = m * w;
        // p(t) = p_r cos − mω x_r sin ; x(t) = x_r cos + p_r/(mω) sin
        pieces[0].push(oscillation_terms(st.p[0], -mw * st.x[0], w, r));
        pieces[1].push(oscillation_terms(st.p[1], -mw * st.x[1], w, r));
        pieces[2].push(oscillation_terms(st.x[0], st.p[0] / mw, w, r));
        pieces[3].push(oscillation_terms(st.x[1], st.p[1] / mw, w, r));
    }
    let [a, b, c, d] = pieces.map(|p| {
        PiecewiseHarmonic::new(breakpoints.clone(), p).expect("schedule breakpoints are sorted")
    });
    (
        QuadratureOperator {
            coeff_p: a,
            coeff_x: b,
            units: *units,
        },
        QuadratureOperator {
            coeff_p: c,
            coeff_x: d,
            units: *units,
        },
    )
}

pub fn heisenberg_momentum(schedule: &FrequencySchedule, units: &Units) -> QuadratureOperator {
    heisenberg_pair(schedule, units).0
}

pub fn heisenberg_position(schedule: &FrequencySchedule, units: &Units) -> QuadratureOperator {
    heisenberg_pair(schedule, units).1
}

/// `⟨[Ô₁(t₁), Ô₂(t₂)]⟩` from the coefficients and `[x̂, p̂] = iħ`.
pub fn commutator(op1: &QuadratureOperator, op2: &QuadratureOperator, t1: f64, t2: f64) -> Complex64 {
    let (a1, b1) = op1.coefficients(t1);
    let (a2, b2) = op2.coefficients(t2);
    Complex64::new(0.0, op1.units.hbar * (b1 * a2 - a1 * b2))
}

/// `⟨[Ô(t), Ô(t')]⟩`; for an unswitched momentum equal to `-iħmω₀ sin ω₀(t - t')`.
pub fn symplectic_check(op: &QuadratureOperator, t: f64, t_prime: f64) -> Complex64 {
    commutator(op, op, t, t_prime)
}

/// `⟨0|Ô₁(t₁)Ô₂(t₂)|0⟩` expanded against the vacuum moments.
pub fn vacuum_two_point(
    op1: &QuadratureOperator,
    op2: &QuadratureOperator,
    t1: f64,
    t2: f64,
) -> Complex64 {
    let m = VacuumMoments::new(&op1.units);
    let (a1, b1) = op1.coefficients(t1);
    let (a2, b2) = op2.coefficients(t2);
    Complex64::new(a1 * a2 * m.pp + b1 * b2 * m.xx, 0.0) + a1 * b2 * m.px + b1 * a2 * m.xp
}

/// `⟨0|Ô²(t)|0⟩`
pub fn momentum_variance(op: &QuadratureOperator, t: f64) -> f64 {
    vacuum_two_point(op, op, t, t).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> (QuadratureOperator, QuadratureOperator) {
        heisenberg_pair(&FrequencySchedule::halved_pulse(&Units::default()), &Units::default())
    }

    #[test]
    fn initial_condition() {
        let (p, _) = pulse();
        assert_eq!(p.coefficients(0.0), (1.0, 0.0));
    }

    #[test]
    fn half_period_inside_pulse() {
        let (p, _) = pulse();
        let (a, b) = p.coefficients(2.0 * PI);
        assert!((a + 1.0).abs() < 1e-14 && b.abs() < 1e-14, "{a} {b}");
    }

    #[test]
    fn returns_to_start_after_pulse() {
        let (p, _) = pulse();
        let (a, b) = p.coefficients(4.0 * PI);
        assert!((a - 1.0).abs() < 1e-14 && b.abs() < 1e-14);
        assert!((momentum_variance(&p, 4.0 * PI + 1.3) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn free_commutator_quarter_period() {
        let p = heisenberg_momentum(&FrequencySchedule::constant(1.0).unwrap(), &Units::default());
        assert_eq!(symplectic_check(&p, 0.4, 0.4), Complex64::new(0.0, 0.0));
        let c = symplectic_check(&p, PI / 2.0, 0.0);
        assert!((c - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let (pp, _) = pulse();
        assert!(symplectic_check(&pp, 2.0 * PI, 2.0 * PI).norm() == 0.0);
    }

    #[test]
    fn vacuum_two_point_values() {
        let free = heisenberg_momentum(&FrequencySchedule::constant(1.0).unwrap(), &Units::default());
        assert!((vacuum_two_point(&free, &free, 0.0, 0.0) - 0.5).norm() < 1e-15);
        let g = vacuum_two_point(&free, &free, PI / 2.0, 0.0);
        assert!((g - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn mode_amplitude_reproduces_two_point() {
        let (p, x) = pulse();
        let fp = p.mode_amplitude();
        let fx = x.mode_amplitude();
        for &(t1, t2) in &[(-1.0, 2.0), (3.0, 3.0), (13.0, -4.0), (7.0, 12.0)] {
            let direct = vacuum_two_point(&p, &x, t1, t2);
            let via_modes = fp.eval(t1) * fx.eval(t2).conj();
            assert!((direct - via_modes).norm() < 1e-14);
        }
    }

    #[test]
    fn variance_at_three_pi() {
        let (p, _) = pulse();
        assert!((momentum_variance(&p, 3.0 * PI) - 0.125).abs() < 1e-13);
        assert!((momentum_variance(&p, -5.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn schedule_validation() {
        let bad = FrequencySchedule::new(vec![
            Segment { start: f64::NEG_INFINITY, end: 0.0, omega: 1.0 },
            Segment { start: 0.5, end: f64::INFINITY, omega: 1.0 },
        ]);
        assert!(matches!(bad, Err(Error::InvalidSchedule(_))));
        assert!(FrequencySchedule::constant(0.0).is_err());
        assert!(FrequencySchedule::constant(-1.0).is_err());
    }

    #[test]
    fn parses_schedule_text() {
        let s: FrequencySchedule = "# comment\n-inf 0 1\n0 12.566370614359172 0.5\n12.566370614359172 +inf 1\n"
            .parse()
            .unwrap();
        assert_eq!(s.segments().len(), 3);
        assert_eq!(s.omega_at(1.0), 0.5);
        assert!("-inf 0 1\n1 +inf 1\n".parse::<FrequencySchedule>().is_err());
        assert!("-inf +inf x\n".parse::<FrequencySchedule>().is_err());
    }

    #[test]
    fn switch_modification() {
        let s = FrequencySchedule::halved_pulse(&Units::default());
        let m = s.with_switch(20.0, 3.0).unwrap();
        assert!(m.agrees_until(&s, 19.0));
        assert!(!m.agrees_until(&s, 21.0));
        let early = s.with_switch(1.0, 2.0).unwrap();
        assert!(!early.agrees_until(&s, 5.0));
        assert!(early.agrees_until(&s, 1.0));
    }
}
