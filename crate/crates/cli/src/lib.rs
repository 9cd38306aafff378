//! Figure reproduction, causality report and self-tests behind the `tnorder`
//! binary.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;
use tnorder::field::{
    classical_response, driven_field_tn, wave_quantization_check, ClassicalCurrent, FieldPoint,
    Mode, ModeSet,
};
use tnorder::oscillator::{heisenberg_momentum, momentum_variance};
use tnorder::projector::{freq_part, pv_project};
use tnorder::special::exp_integral;
use tnorder::tn::{
    no_peep_check, tn_pair_exact_direct, tn_pair_exact_with, tn_pair_kk_with, Backend,
    Observable,
};
use tnorder::{
    FrequencySchedule, HarmonicTerm, PiecewiseHarmonic, ProjectorSign, QuadratureControls,
    QuadratureOperator, Units,
};

/// Distance from a schedule switch inside which rows use the quadrature path.
pub const BREAKPOINT_GUARD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(tnorder::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<tnorder::Error> for CliError {
    fn from(e: tnorder::Error) -> Self {
        match e {
            tnorder::Error::InvalidInput(m) | tnorder::Error::InvalidSchedule(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    SemiAnalytic,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: Units,
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub method: EvalMethod,
    pub controls: QuadratureControls,
    pub schedule: FrequencySchedule,
    /// Whether the schedule is the built-in halved-frequency pulse.
    pub builtin_schedule: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let units = Units::default();
        Self {
            units,
            t_min: -4.0 * PI,
            t_max: 16.0 * PI,
            dt: PI / 20.0,
            method: EvalMethod::SemiAnalytic,
            controls: QuadratureControls::default(),
            schedule: FrequencySchedule::halved_pulse(&units),
            builtin_schedule: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.t_min < self.t_max) || !self.t_min.is_finite() || !self.t_max.is_finite() {
            return Err(CliError::Config(format!(
                "need finite t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(CliError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.grid_len() > 10_000_000 {
            return Err(CliError::Config("grid has more than 10^7 points".into()));
        }
        self.controls.validate()?;
        Ok(())
    }

    pub fn grid_len(&self) -> usize {
        let steps = (self.t_max - self.t_min) / self.dt;
        // absorb rounding in ratios such as 20π / (π/20)
        (steps * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|i| self.t_min + i as f64 * self.dt).collect()
    }

    fn momentum(&self) -> QuadratureOperator {
        heisenberg_momentum(&self.schedule, &self.units)
    }

    fn near_breakpoint(&self, t: f64) -> bool {
        self.schedule
            .breakpoints()
            .iter()
            .any(|b| (t - b).abs() <= BREAKPOINT_GUARD)
    }

    fn backend_at(&self, t: f64) -> Backend {
        if self.method == EvalMethod::Quadrature || self.near_breakpoint(t) {
            Backend::Quadrature(self.controls)
        } else {
            Backend::SemiAnalytic
        }
    }

    fn backend(&self) -> Backend {
        match self.method {
            EvalMethod::SemiAnalytic => Backend::SemiAnalytic,
            EvalMethod::Quadrature => Backend::Quadrature(self.controls),
        }
    }

    /// `ħmω₀`, the unit of every time-normal value.
    fn tn_unit(&self) -> f64 {
        self.units.hbar * self.units.mass * self.units.omega0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub t: f64,
    pub tn_exact: f64,
    pub tn_kk: f64,
    pub p2: f64,
}

fn equal_time_row(cfg: &RunConfig, p: &QuadratureOperator, t: f64) -> Result<FigureRow, CliError> {
    let backend = cfg.backend_at(t);
    Ok(FigureRow {
        t,
        tn_exact: tn_pair_exact_with(p, p, t, t, backend)?.value.re,
        tn_kk: tn_pair_kk_with(p, p, t, t, backend)?.value.re,
        p2: momentum_variance(p, t),
    })
}

/// Equal-time exact and Kelley–Kleiner averages of `p̂²` with the variance,
/// in ascending `t`.
pub fn figure1_rows(cfg: &RunConfig) -> Result<Vec<FigureRow>, CliError> {
    cfg.validate()?;
    let p = cfg.momentum();
    cfg.grid()
        .into_par_iter()
        .map(|t| equal_time_row(cfg, &p, t))
        .collect()
}

pub fn render_csv(rows: &[FigureRow]) -> String {
    let mut out = String::from("t,tn_exact,tn_kk,p2\n");
    for r in rows {
        writeln!(out, "{:.11e},{:.11e},{:.11e},{:.11e}", r.t, r.tn_exact, r.tn_kk, r.p2).unwrap();
    }
    out
}

/// Three polylines (exact, Kelley–Kleiner, variance) on shared axes.
pub fn render_svg(rows: &[FigureRow]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let (t0, t1) = (rows.first().map_or(0.0, |r| r.t), rows.last().map_or(1.0, |r| r.t));
    let values = rows.iter().flat_map(|r| [r.tn_exact, r.tn_kk, r.p2]);
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let span_t = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |t: f64| PAD + (t - t0) / span_t * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if lo < 0.0 && hi > 0.0 {
        writeln!(out, r#"<line x1="{PAD}" y1="{0:.3}" x2="{1}" y2="{0:.3}" stroke="gray" stroke-width="0.5"/>"#, y(0.0), W - PAD).unwrap();
    }
    let series: [(&str, &str, fn(&FigureRow) -> f64); 3] = [
        ("tn_exact", "black", |r| r.tn_exact),
        ("tn_kk", "red", |r| r.tn_kk),
        ("p2", "blue", |r| r.p2),
    ];
    for (name, color, get) in series {
        let pts: Vec<String> = rows.iter().map(|r| format!("{:.3},{:.3}", x(r.t), y(get(r)))).collect();
        writeln!(
            out,
            r#"<polyline id="{name}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        let outcome = if pass { Outcome::Pass } else { Outcome::Fail };
        Self { name, outcome, detail }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self { name, outcome: Outcome::Skipped, detail: why.into() }
    }
}

pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.outcome != Outcome::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let tag = match l.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skipped => "SKIP",
            };
            writeln!(out, "{tag:<4}  {:<28} {}", l.name, l.detail).unwrap();
        }
        out
    }
}

/// Causality checks over the configured grid: the exact average vanishes
/// before the first switch, the Kelley–Kleiner one does not, later schedule
/// changes leave the exact average untouched, and the two exact paths agree.
pub fn causality_report(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let p = cfg.momentum();
    let unit = cfg.tn_unit();
    let mut lines = Vec::new();

    let first_switch = cfg.schedule.breakpoints().first().copied();
    let pre: Vec<f64> = match first_switch {
        Some(b) => cfg.grid().into_iter().filter(|&t| t <= b - BREAKPOINT_GUARD).collect(),
        None => Vec::new(),
    };
    if pre.is_empty() {
        let why = "no grid points before the first switch";
        lines.push(CheckLine::skipped("exact pre-switch zero", why));
        lines.push(CheckLine::skipped("kk pre-switch nonzero", why));
    } else {
        let rows: Vec<FigureRow> = pre
            .par_iter()
            .map(|&t| equal_time_row(cfg, &p, t))
            .collect::<Result<_, _>>()?;
        let sup = rows.iter().map(|r| r.tn_exact.abs()).fold(0.0, f64::max) / unit;
        let kk = rows.iter().map(|r| r.tn_kk.abs()).fold(0.0, f64::max) / unit;
        lines.push(CheckLine::new("exact pre-switch zero", sup < 1e-6, format!("sup |TN| = {sup:.3e} (< 1e-6) over {} points", rows.len())));
        lines.push(CheckLine::new("kk pre-switch nonzero", kk > 1e-3, format!("max |TN_KK| = {kk:.3e} (> 1e-3)")));
    }

    let plateau: Vec<f64> = [2.0, 2.5, 3.0, 3.5]
        .iter()
        .map(|k| k * PI / cfg.units.omega0)
        .filter(|&t| t >= cfg.t_min && t <= cfg.t_max)
        .collect();
    if !cfg.builtin_schedule {
        lines.push(CheckLine::skipped("plateau shift", "custom schedule"));
        lines.push(CheckLine::skipped("plateau kk proximity", "custom schedule"));
    } else if plateau.is_empty() {
        lines.push(CheckLine::skipped("plateau shift", "no plateau times in range"));
        lines.push(CheckLine::skipped("plateau kk proximity", "no plateau times in range"));
    } else {
        let rows: Vec<FigureRow> = plateau.iter().map(|&t| equal_time_row(cfg, &p, t)).collect::<Result<_, _>>()?;
        let shift = rows.iter().map(|r| (r.tn_exact - (r.p2 - 0.25 * unit)).abs()).fold(0.0, f64::max) / unit;
        let closer = rows.iter().all(|r| (r.tn_kk - r.tn_exact).abs() < (r.tn_exact - r.p2).abs());
        lines.push(CheckLine::new("plateau shift", shift < 0.02, format!("max |TN - (<p2> - 1/4)| = {shift:.3e} (< 0.02)")));
        lines.push(CheckLine::new("plateau kk proximity", closer, "|TN_KK - TN| < |TN - <p2>| at every plateau time".into()));
    }

    let span = cfg.t_max - cfg.t_min;
    let at = |f: f64| cfg.t_min + f * span;
    let mut worst: f64 = 0.0;
    for times in [vec![at(0.5), at(0.75)], vec![at(0.2), at(0.4), at(0.6), at(0.8)]] {
        let obs: Vec<Observable> = times
            .iter()
            .enumerate()
            .map(|(k, _)| if k % 2 == 0 { Observable::Momentum } else { Observable::Position })
            .collect();
        let latest = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let modified = cfg.schedule.with_switch(latest + 1.0 / cfg.units.omega0, 2.0 * cfg.units.omega0)?;
        worst = worst.max(no_peep_check(&obs, &times, &cfg.schedule, &modified, &cfg.units)? / unit);
    }
    lines.push(CheckLine::new("no-peep invariance", worst < 1e-6, format!("max change = {worst:.3e} (< 1e-6), m = 2 and 4")));

    let mut path_ok = true;
    let mut path_worst: f64 = 0.0;
    for (t1, t2) in [(at(0.6), at(0.6)), (at(0.7), at(0.4))] {
        let a = tn_pair_exact_with(&p, &p, t1, t2, cfg.backend())?;
        let d = tn_pair_exact_direct(&p, &p, t1, t2, cfg.controls)?;
        let diff = (a.value - d.value).norm();
        path_ok &= diff <= (1e-4 * a.value.norm()).max(a.error_estimate + d.error_estimate);
        path_worst = path_worst.max(diff / unit);
    }
    lines.push(CheckLine::new(
        "path equivalence",
        path_ok,
        format!("max |rearranged - direct| = {path_worst:.3e} (within 1e-4 relative or error estimates)"),
    ));

    Ok(Report { lines })
}

const E1_REFERENCE: [((f64, f64), (f64, f64)); 8] = [
    ((1.0, 0.0), (0.21938393439552027368, 0.0)),
    ((0.0, 2.0), (-0.4229808287748649957, 0.034616650007798229345)),
    ((0.0, -3.0), (-0.11962978600800032763, -0.27785620120457163717)),
    ((0.0, 0.1), (1.7278683866572965838, -1.4708518656866196635)),
    ((1.0, 1.0), (0.00028162445198141832551, -0.17932453503935894015)),
    ((-2.0, 0.5), (-4.7257499447988616976, -1.3323418528141996721)),
    ((5.0, -7.0), (-0.000013465108752291996252, 0.00073036172726465233849)),
    ((0.0, 40.0), (-0.019020007896208766962, 0.016188792559887887544)),
];

const SELFTEST_RATES: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

fn selftest_function(rng: &mut ChaCha8Rng) -> (PiecewiseHarmonic, f64) {
    let a = rng.gen_range(-4.0..0.0);
    let b = a + rng.gen_range(0.5..4.0);
    let mut term = || {
        HarmonicTerm::new(
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            SELFTEST_RATES[rng.gen_range(0..SELFTEST_RATES.len())],
        )
    };
    let pieces = vec![vec![term()], vec![term(), term()], vec![term()]];
    let f = PiecewiseHarmonic::new(vec![a, b], pieces).expect("sorted breakpoints");
    let t = loop {
        let t: f64 = rng.gen_range(-6.0..6.0);
        if (t - a).abs() > BREAKPOINT_GUARD && (t - b).abs() > BREAKPOINT_GUARD {
            break t;
        }
    };
    (f, t)
}

/// Residual suites for the projector, the exponential integral and the field
/// identities.
pub fn selftest(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.controls.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut lines = Vec::new();

    let mut sum_rule: f64 = 0.0;
    for _ in 0..30 {
        let (f, t) = selftest_function(&mut rng);
        let s = freq_part(&f, ProjectorSign::Positive)?.eval(t)? + freq_part(&f, ProjectorSign::Negative)?.eval(t)?;
        sum_rule = sum_rule.max((s - f.eval(t)).norm());
    }
    lines.push(CheckLine::new("kernel sum rule", sum_rule < 1e-8, format!("residual {sum_rule:.3e} (< 1e-8)")));

    let mut e1: f64 = 0.0;
    for ((zr, zi), (wr, wi)) in E1_REFERENCE {
        let want = Complex64::new(wr, wi);
        let got = exp_integral(Complex64::new(zr, zi))?;
        e1 = e1.max((got - want).norm() / want.norm());
    }
    lines.push(CheckLine::new("exponential integral", e1 < 1e-12, format!("relative error {e1:.3e} (< 1e-12)")));

    let mut oracle: f64 = 0.0;
    for k in 0..20 {
        let (f, t) = selftest_function(&mut rng);
        let s = if k % 2 == 0 { ProjectorSign::Positive } else { ProjectorSign::Negative };
        let semi = freq_part(&f, s)?.eval(t)?;
        let quad = pv_project(&f, s, t, cfg.controls)?;
        oracle = oracle.max((semi - quad.value).norm());
    }
    let oracle_tol = 1e-6f64.max(100.0 * cfg.controls.tolerance);
    lines.push(CheckLine::new("oracle agreement", oracle < oracle_tol, format!("max difference {oracle:.3e} (< {oracle_tol:.0e})")));

    let modes = (0..5)
        .map(|_| {
            let u = (0..2).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            Mode::new(rng.gen_range(0.2..3.0), u)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ms = ModeSet::new(modes, cfg.units.hbar)?;
    let mut wave: f64 = 0.0;
    for _ in 0..100 {
        let labels = (rng.gen_range(0..2), rng.gen_range(0..2));
        wave = wave.max(wave_quantization_check(&ms, labels, rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))?);
    }
    lines.push(CheckLine::new("wave quantisation", wave < 1e-10, format!("residual {wave:.3e} (< 1e-10)")));

    let current = ClassicalCurrent::parse(
        "labels 2\nsegment 0 -1 2 0.5 0.2 1.3\nsegment 0 -1 2 0.5 -0.2 -1.3\nsegment 1 0 3 0.3 0 0\nimpulse 1 0.5 0.7\n",
    )?;
    let mut radiation: f64 = 0.0;
    for _ in 0..20 {
        let p = FieldPoint { label: rng.gen_range(0..2), t: rng.gen_range(0.5..6.0) };
        let q = FieldPoint { label: rng.gen_range(0..2), t: rng.gen_range(0.5..6.0) };
        let product = classical_response(&ms, &current, p.label, p.t)? * classical_response(&ms, &current, q.label, q.t)?;
        let tn = driven_field_tn(&ms, &current, &[p, q])?;
        radiation = radiation.max((tn - product).norm() / product.abs().max(1e-12));
    }
    lines.push(CheckLine::new("radiation law", radiation < 1e-6, format!("relative residual {radiation:.3e} (< 1e-6)")));

    Ok(Report { lines })
}
