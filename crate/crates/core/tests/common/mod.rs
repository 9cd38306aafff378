#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use tnorder::{HarmonicTerm, PiecewiseHarmonic};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const RATES: [f64; 8] = [-3.0, -1.7, -1.0, -0.5, 0.5, 1.0, 1.7, 3.0];

/// A piecewise-harmonic function whose unbounded pieces oscillate, so every
/// projection of it converges.
pub fn random_piecewise<R: Rng>(rng: &mut R) -> PiecewiseHarmonic {
    let nb = rng.gen_range(1..=3);
    let mut bps: Vec<f64> = (0..nb).map(|_| rng.gen_range(-5.0..5.0)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() < 0.5);
    let pieces = (0..=bps.len())
        .map(|i| {
            let outer = i == 0 || i == bps.len();
            let n = rng.gen_range(0..=3);
            (0..n)
                .map(|_| {
                    let rate = if !outer && rng.gen_bool(0.25) {
                        0.0
                    } else {
                        RATES[rng.gen_range(0..RATES.len())]
                    };
                    HarmonicTerm::new(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rate)
                })
                .collect()
        })
        .collect();
    PiecewiseHarmonic::new(bps, pieces).unwrap()
}

/// A sample point at least `gap` away from every breakpoint of `f`.
pub fn point_away_from_breaks<R: Rng>(rng: &mut R, f: &PiecewiseHarmonic, gap: f64) -> f64 {
    loop {
        let t: f64 = rng.gen_range(-8.0..8.0);
        if f.breakpoints().iter().all(|b| (t - b).abs() >= gap) {
            return t;
        }
    }
}

pub fn arb_piecewise() -> impl Strategy<Value = (PiecewiseHarmonic, f64)> {
    any::<u64>().prop_map(|seed| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = random_piecewise(&mut rng);
        let t = point_away_from_breaks(&mut rng, &f, 1e-3);
        (f, t)
    })
}
