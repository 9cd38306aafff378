use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnorder::field::*;
use tnorder::{HarmonicTerm, PiecewiseHarmonic};

fn random_modes<R: Rng>(rng: &mut R, n: usize, labels: usize) -> ModeSet {
    let modes = (0..n)
        .map(|_| {
            let amps = (0..labels)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            Mode::new(rng.gen_range(0.2..3.0), amps).unwrap()
        })
        .collect();
    ModeSet::new(modes, rng.gen_range(0.5..2.0)).unwrap()
}

/// A real current switched on over a finite window per label.
fn random_current<R: Rng>(rng: &mut R, labels: usize) -> ClassicalCurrent {
    let densities = (0..labels)
        .map(|_| {
            let a = rng.gen_range(-4.0..0.0);
            let b = a + rng.gen_range(0.5..5.0);
            let nu = rng.gen_range(0.1..2.5);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let dc = Complex64::new(rng.gen_range(-0.5..0.5), 0.0);
            let terms = vec![HarmonicTerm::new(c, nu), HarmonicTerm::new(c.conj(), -nu), HarmonicTerm::new(dc, 0.0)];
            PiecewiseHarmonic::new(vec![a, b], vec![vec![], terms, vec![]]).unwrap()
        })
        .collect();
    let impulses = (0..rng.gen_range(0..3))
        .map(|_| Impulse {
            label: rng.gen_range(0..labels),
            time: rng.gen_range(-3.0..2.0),
            weight: rng.gen_range(-1.0..1.0),
        })
        .collect();
    ClassicalCurrent::new(densities, impulses).unwrap()
}

/// Composite Simpson convolution of the response with the current.
fn response_by_quadrature(ms: &ModeSet, j: &ClassicalCurrent, x: usize, t: f64) -> f64 {
    let mut total = 0.0;
    for (xp, density) in j.densities().iter().enumerate() {
        for ((a, b), terms) in density.intervals() {
            if terms.is_empty() || a >= t {
                continue;
            }
            let hi = b.min(t);
            let n = 4000;
            let h = (hi - a) / n as f64;
            let g = |s: f64| delta_r(ms, (x, xp), t - s).unwrap() * density.eval(s).re;
            // one-sided values at the window edges
            let edge = |s: f64| {
                delta_r(ms, (x, xp), t - s).unwrap() * terms.iter().map(|term| term.eval(s)).sum::<Complex64>().re
            };
            let mut sum = edge(a) + edge(hi);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * g(a + k as f64 * h);
            }
            total += sum * h / 3.0;
        }
    }
    for imp in j.impulses() {
        if imp.time <= t {
            total += imp.weight * delta_r(ms, (x, imp.label), t - imp.time).unwrap();
        }
    }
    total
}

#[test]
fn wave_quantisation_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let ms = random_modes(&mut rng, 5, 3);
        for _ in 0..100 {
            let (x, xp) = (rng.gen_range(0..3), rng.gen_range(0..3));
            let (t, tp) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            worst = worst.max(wave_quantization_check(&ms, (x, xp), t, tp).unwrap());
        }
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn closed_form_response_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let ms = random_modes(&mut rng, 3, 2);
        let j = random_current(&mut rng, 2);
        for _ in 0..5 {
            let x = rng.gen_range(0..2);
            let t = rng.gen_range(-5.0..8.0);
            let closed = classical_response(&ms, &j, x, t).unwrap();
            let quad = response_by_quadrature(&ms, &j, x, t);
            assert!((closed - quad).abs() < 1e-8 * (1.0 + quad.abs()), "{closed} vs {quad}");
        }
    }
}

#[test]
fn radiation_law_factorises() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut done = 0;
    while done < 20 {
        let n = rng.gen_range(1..6);
        let ms = random_modes(&mut rng, n, 2);
        let j = random_current(&mut rng, 2);
        let p = FieldPoint { label: rng.gen_range(0..2), t: rng.gen_range(0.0..8.0) };
        let q = FieldPoint { label: rng.gen_range(0..2), t: rng.gen_range(0.0..8.0) };
        let e1 = response_by_quadrature(&ms, &j, p.label, p.t);
        let e2 = response_by_quadrature(&ms, &j, q.label, q.t);
        if e1.abs() < 1e-2 || e2.abs() < 1e-2 {
            continue;
        }
        let one = driven_field_tn(&ms, &j, &[p]).unwrap();
        let two = driven_field_tn(&ms, &j, &[p, q]).unwrap();
        assert!((one.re - e1).abs() < 1e-6 * e1.abs(), "{one} vs {e1}");
        assert!((two - e1 * e2).norm() < 1e-6 * (e1 * e2).abs(), "{two} vs {}", e1 * e2);
        let second = driven_field_tn(&ms, &j, &[q]).unwrap();
        assert!((two - one * second).norm() < 1e-6 * (one * second).norm());
        done += 1;
    }
}

#[test]
fn impulse_gives_shifted_response() {
    let ms = ModeSet::new(vec![Mode::single(1.0, Complex64::new(1.0, 0.0)).unwrap()], 1.0).unwrap();
    let j = ClassicalCurrent::new(
        vec![PiecewiseHarmonic::zero()],
        vec![Impulse { label: 0, time: 0.5, weight: 2.0 }],
    )
    .unwrap();
    for t in [0.0, 0.6, 3.0] {
        let got = driven_field_tn(&ms, &j, &[FieldPoint { label: 0, t }]).unwrap();
        assert_eq!(got.re, 2.0 * delta_r(&ms, (0, 0), t - 0.5).unwrap());
    }
}

proptest! {
    #[test]
    fn response_is_retarded(seed in any::<u64>(), tau in -50.0f64..-1e-12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ms = random_modes(&mut rng, 4, 2);
        prop_assert_eq!(delta_r(&ms, (0, 1), tau).unwrap(), 0.0);
        prop_assert_eq!(delta_r(&ms, (1, 1), tau).unwrap(), 0.0);
    }

    #[test]
    fn classical_emulation(seed in any::<u64>()) {
        // with operators replaced by c-numbers the free field is absent and
        // the average is the plain product of classical fields
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ms = random_modes(&mut rng, 3, 2);
        let j = random_current(&mut rng, 2);
        let p = FieldPoint { label: 0, t: rng.gen_range(-2.0..6.0) };
        let q = FieldPoint { label: 1, t: rng.gen_range(-2.0..6.0) };
        let e1 = classical_response(&ms, &j, p.label, p.t).unwrap();
        let e2 = classical_response(&ms, &j, q.label, q.t).unwrap();
        let two = driven_field_tn(&ms, &j, &[p, q]).unwrap();
        prop_assert!((two - e1 * e2).norm() < 1e-10 * (1.0 + (e1 * e2).abs()));
    }
}
