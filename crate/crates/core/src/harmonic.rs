//! Piecewise sums of complex exponentials on the real line.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One term `coeff · exp(-i·rate·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTerm {
    pub coeff: Complex64,
    pub rate: f64,
}

impl HarmonicTerm {
    pub fn new(coeff: Complex64, rate: f64) -> Self {
        Self { coeff, rate }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeff * Complex64::from_polar(1.0, -self.rate * t)
    }
}

/// A function given on each interval between sorted breakpoints as a finite
/// sum of `c·exp(-iωt)`. The first and last intervals are unbounded.
///
/// At a breakpoint [`eval`](Self::eval) returns the mean of the one-sided
/// limits.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHarmonic {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<HarmonicTerm>>,
}

fn rates_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
}

fn canonical_terms(terms: &[HarmonicTerm]) -> Vec<HarmonicTerm> {
    let mut out: Vec<HarmonicTerm> = Vec::with_capacity(terms.len());
    for term in terms {
        match out.iter_mut().find(|t| rates_equal(t.rate, term.rate)) {
            Some(existing) => existing.coeff += term.coeff,
            None => out.push(*term),
        }
    }
    out.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
    out.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    out
}

impl PiecewiseHarmonic {
    /// `pieces[i]` lives on `(breakpoints[i-1], breakpoints[i])`, so there is
    /// one more piece than there are breakpoints.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<HarmonicTerm>>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for term in pieces.iter().flatten() {
            if !term.rate.is_finite() || !term.coeff.re.is_finite() || !term.coeff.im.is_finite()
            {
                return Err(Error::InvalidInput(format!("non-finite term {term:?}")));
            }
        }
        let pieces = pieces.iter().map(|p| canonical_terms(p)).collect();
        Ok(Self { breakpoints, pieces })
    }

    /// The same sum of exponentials on the whole line.
    pub fn harmonic(terms: Vec<HarmonicTerm>) -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: vec![canonical_terms(&terms)],
        }
    }

    pub fn constant(value: Complex64) -> Self {
        Self::harmonic(vec![HarmonicTerm::new(value, 0.0)])
    }

    pub fn zero() -> Self {
        Self::harmonic(Vec::new())
    }

    /// `θ(t - start) · Σ terms`
    pub fn switched_on(start: f64, terms: Vec<HarmonicTerm>) -> Self {
        Self {
            breakpoints: vec![start],
            pieces: vec![Vec::new(), canonical_terms(&terms)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<HarmonicTerm>] {
        &self.pieces
    }

    /// Bounds of interval `i`, with infinite outer ends.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.breakpoints[i - 1]
        };
        let hi = self
            .breakpoints
            .get(i)
            .copied()
            .unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn intervals(&self) -> impl Iterator<Item = ((f64, f64), &[HarmonicTerm])> + '_ {
        self.pieces
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.interval(i), p.as_slice()))
    }

    fn piece_sum(&self, i: usize, t: f64) -> Complex64 {
        self.pieces[i].iter().map(|term| term.eval(t)).sum()
    }

    /// Index of the interval containing `t`, or `Err(k)` if `t` is breakpoint `k`.
    fn locate(&self, t: f64) -> std::result::Result<usize, usize> {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        if idx < self.breakpoints.len() && self.breakpoints[idx] == t {
            Err(idx)
        } else {
            Ok(idx)
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Ok(i) => self.piece_sum(i, t),
            Err(k) => 0.5 * (self.piece_sum(k, t) + self.piece_sum(k + 1, t)),
        }
    }

    /// Limit from below.
    pub fn eval_left(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Ok(i) => self.piece_sum(i, t),
            Err(k) => self.piece_sum(k, t),
        }
    }

    /// Limit from above.
    pub fn eval_right(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Ok(i) => self.piece_sum(i, t),
            Err(k) => self.piece_sum(k + 1, t),
        }
    }

    /// Largest jump `|f(b+) - f(b-)|` over all breakpoints.
    pub fn max_jump(&self) -> f64 {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(k, &b)| (self.piece_sum(k + 1, b) - self.piece_sum(k, b)).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    canonical_terms(
                        &p.iter()
                            .map(|t| HarmonicTerm::new(t.coeff.conj(), -t.rate))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    canonical_terms(
                        &p.iter()
                            .map(|t| HarmonicTerm::new(t.coeff * factor, t.rate))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect(),
        }
    }

    /// Re-express on a finer breakpoint set (which must contain ours).
    fn refine(&self, breakpoints: &[f64]) -> Vec<Vec<HarmonicTerm>> {
        (0..=breakpoints.len())
            .map(|i| {
                let lo = if i == 0 { None } else { Some(breakpoints[i - 1]) };
                let hi = breakpoints.get(i).copied();
                let probe = match (lo, hi) {
                    (Some(a), Some(b)) => 0.5 * (a + b),
                    (Some(a), None) => a + 1.0,
                    (None, Some(b)) => b - 1.0,
                    (None, None) => 0.0,
                };
                let idx = self.breakpoints.partition_point(|&b| b < probe);
                self.pieces[idx].clone()
            })
            .collect()
    }

    fn merged_breakpoints(&self, other: &[f64]) -> Vec<f64> {
        let mut all: Vec<f64> = self.breakpoints.iter().chain(other).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    pub fn add(&self, other: &Self) -> Self {
        let bps = self.merged_breakpoints(&other.breakpoints);
        let a = self.refine(&bps);
        let b = other.refine(&bps);
        let pieces = a
            .into_iter()
            .zip(b)
            .map(|(mut x, y)| {
                x.extend(y);
                canonical_terms(&x)
            })
            .collect();
        Self {
            breakpoints: bps,
            pieces,
        }
    }

    /// `f(t)` for `t < upper`, zero above.
    pub fn truncate_above(&self, upper: f64) -> Self {
        let bps = self.merged_breakpoints(&[upper]);
        let mut pieces = self.refine(&bps);
        let cut = bps.partition_point(|&b| b < upper);
        for p in pieces.iter_mut().skip(cut + 1) {
            p.clear();
        }
        Self {
            breakpoints: bps,
            pieces,
        }
    }

    /// `f(t)` for `t > lower`, zero below.
    pub fn truncate_below(&self, lower: f64) -> Self {
        let bps = self.merged_breakpoints(&[lower]);
        let mut pieces = self.refine(&bps);
        let cut = bps.partition_point(|&b| b < lower);
        for p in pieces.iter_mut().take(cut + 1) {
            p.clear();
        }
        Self {
            breakpoints: bps,
            pieces,
        }
    }

    /// Real-valued instances pair every `(c, ω)` with `(c*, -ω)`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.pieces.iter().all(|p| {
            p.iter().all(|t| {
                p.iter().any(|u| {
                    rates_equal(u.rate, -t.rate) && (u.coeff - t.coeff.conj()).norm() <= tol
                })
            })
        })
    }

    pub fn max_rate(&self) -> f64 {
        self.pieces
            .iter()
            .flatten()
            .map(|t| t.rate.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_nonzero_rate(&self) -> Option<f64> {
        self.pieces
            .iter()
            .flatten()
            .map(|t| t.rate.abs())
            .filter(|&r| r > 0.0)
            .min_by(f64::total_cmp)
    }
}
