use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnorder::oscillator::{heisenberg_momentum, heisenberg_pair, momentum_variance};
use tnorder::tn::*;
use tnorder::{FrequencySchedule, QuadratureControls, QuadratureOperator, Units};

const T0: f64 = 2.0 * PI;

fn units() -> Units {
    Units::default()
}

fn pulse() -> FrequencySchedule {
    FrequencySchedule::halved_pulse(&units())
}

fn pulse_p() -> QuadratureOperator {
    heisenberg_momentum(&pulse(), &units())
}

fn free_pair() -> (QuadratureOperator, QuadratureOperator) {
    heisenberg_pair(&FrequencySchedule::constant(1.0).unwrap(), &units())
}

#[test]
fn free_oscillator_averages_vanish() {
    let (p, x) = free_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let ts: Vec<f64> = (0..4).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let ops = [p.clone(), x.clone(), p.clone(), x.clone()];
        for r in [
            tn_pair_exact(&p, &x, ts[0], ts[1]).unwrap(),
            tn_pair_kk(&p, &x, ts[0], ts[1]).unwrap(),
            tn_multi_exact(&ops, &ts).unwrap(),
            tn_multi_kk(&ops, &ts).unwrap(),
        ] {
            assert!(r.value.norm() < 1e-8, "{ts:?}: {r:?}");
        }
    }
}

#[test]
fn exact_pre_switch_zero_kk_not() {
    let p = pulse_p();
    let mut sup_exact: f64 = 0.0;
    let mut max_kk: f64 = 0.0;
    for i in 0..=200 {
        let t = -2.0 * T0 + (2.0 * T0 - 0.05) * i as f64 / 200.0;
        sup_exact = sup_exact.max(tn_pair_exact(&p, &p, t, t).unwrap().value.norm());
        max_kk = max_kk.max(tn_pair_kk(&p, &p, t, t).unwrap().value.norm());
    }
    assert!(sup_exact < 1e-6, "exact {sup_exact:e}");
    assert!(max_kk > 1e-3, "kk {max_kk:e}");
}

#[test]
fn plateau_relation() {
    let p = pulse_p();
    for k in [2.0, 2.5, 3.0, 3.5] {
        let t = k * PI;
        let exact = tn_pair_exact(&p, &p, t, t).unwrap().value.re;
        let kk = tn_pair_kk(&p, &p, t, t).unwrap().value.re;
        let p2 = momentum_variance(&p, t);
        assert!((exact - (p2 - 0.25)).abs() < 0.02, "{k}π: {exact} vs {}", p2 - 0.25);
        assert!((kk - exact).abs() < (exact - p2).abs(), "{k}π");
        assert!((kk - exact).abs() < 0.05, "{k}π");
    }
    let at = tn_pair_exact(&p, &p, 3.0 * PI, 3.0 * PI).unwrap().value.re;
    assert!((at + 0.125).abs() < 0.02);
}

#[test]
fn rearranged_and_direct_paths_agree() {
    let p = pulse_p();
    let controls = QuadratureControls::default();
    let pairs = [
        (3.0 * PI, 3.0 * PI),
        (7.0, 2.5),
        (2.5 * PI, 1.0),
        (10.0, 14.0),
        (-1.0, 5.0),
    ];
    for (t1, t2) in pairs {
        let a = tn_pair_exact(&p, &p, t1, t2).unwrap();
        let d = tn_pair_exact_direct(&p, &p, t1, t2, controls).unwrap();
        assert_eq!(d.path, EvalPath::Direct);
        let rel = (a.value - d.value).norm() / a.value.norm();
        assert!(rel < 1e-4, "({t1},{t2}): {} vs {} (rel {rel:e})", a.value, d.value);
    }
    let d = tn_pair_exact_direct(&p, &p, -1.0, -1.0, controls).unwrap();
    assert!(d.value.norm() < 1e-4, "{d:?}");
    let (fp, fx) = free_pair();
    for (t1, t2) in [(1.3, -0.4), (2.0, 2.0)] {
        let d = tn_pair_exact_direct(&fp, &fp, t1, t2, controls).unwrap();
        assert!(d.value.norm() < 1e-4, "{d:?}");
    }
    let d = tn_pair_exact_direct(&fp, &fx, 0.3, 4.1, controls).unwrap();
    assert!(d.value.norm() < 1e-4, "{d:?}");
}

#[test]
fn quadrature_backend_at_breakpoints() {
    let p = pulse_p();
    let controls = QuadratureControls::default();
    for t in [0.0, 0.02, 4.0 * PI, 4.0 * PI - 0.03] {
        let quad = tn_pair_exact_with(&p, &p, t, t, Backend::Quadrature(controls)).unwrap();
        let semi = tn_pair_exact(&p, &p, t, t).unwrap();
        assert!((quad.value - semi.value).norm() < 1e-6, "{t}: {quad:?} vs {semi:?}");
    }
    // the amplitude is continuous at the switch, so its projections stay finite there
    let kk = tn_pair_kk_with(&p, &p, 0.0, 0.0, Backend::Quadrature(controls)).unwrap();
    assert!(kk.value.norm().is_finite());
}

#[test]
fn no_peep_invariance() {
    let u = units();
    let s = pulse();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let (obs, times): (Vec<Observable>, Vec<f64>) = if trial % 2 == 0 {
            (
                vec![Observable::Momentum, Observable::Position],
                (0..2).map(|_| rng.gen_range(-3.0..15.0)).collect(),
            )
        } else {
            (
                vec![Observable::Momentum, Observable::Momentum, Observable::Position, Observable::Momentum],
                (0..4).map(|_| rng.gen_range(-3.0..15.0)).collect(),
            )
        };
        let latest = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let modified = s
            .with_switch(latest + rng.gen_range(0.01..3.0), rng.gen_range(0.2..3.0))
            .unwrap();
        let diff = no_peep_check(&obs, &times, &s, &modified, &u).unwrap();
        assert!(diff < 1e-6, "trial {trial}: {diff:e}");
    }
    let obs = [Observable::Momentum, Observable::Momentum];
    let late = s.with_switch(2.0, 0.7).unwrap();
    assert!(no_peep_check(&obs, &[1.0, 3.0], &s, &late, &u).is_err());
}

#[test]
fn kk_feels_the_future_switch() {
    let u = units();
    let obs = [Observable::Momentum, Observable::Momentum];
    let never = FrequencySchedule::constant(u.omega0).unwrap();
    let kk = schedule_sensitivity(Method::KelleyKleiner, &obs, &[-1.0, -1.0], &pulse(), &never, &u, Backend::SemiAnalytic).unwrap();
    let exact = schedule_sensitivity(Method::Exact, &obs, &[-1.0, -1.0], &pulse(), &never, &u, Backend::SemiAnalytic).unwrap();
    assert!(kk > 1e-3, "{kk:e}");
    assert!(exact < 1e-6, "{exact:e}");
}

#[test]
fn direct_path_no_peep() {
    // the direct expansion integrates over future times; the sum still cannot see them
    let u = units();
    let s = pulse();
    let modified = s.with_switch(8.0, 2.0).unwrap();
    let c = QuadratureControls::default();
    let a = tn_pair_exact_direct(&heisenberg_momentum(&s, &u), &heisenberg_momentum(&s, &u), 6.0, 3.0, c).unwrap();
    let b = tn_pair_exact_direct(
        &heisenberg_momentum(&modified, &u),
        &heisenberg_momentum(&modified, &u),
        6.0,
        3.0,
        c,
    )
    .unwrap();
    assert!((a.value - b.value).norm() < 1e-5, "{:?} vs {:?}", a, b);
}

/// Truncated single-mode Fock space, enough for four quanta.
mod fock {
    use num_complex::Complex64;

    pub const N: usize = 8;
    pub type Mat = [[Complex64; N]; N];

    pub fn linear(f: Complex64) -> Mat {
        let mut m = [[Complex64::new(0.0, 0.0); N]; N];
        for n in 1..N {
            let s = (n as f64).sqrt();
            m[n - 1][n] = f * s; // â
            m[n][n - 1] = f.conj() * s; // â†
        }
        m
    }

    pub fn vacuum_average(ops: &[&Mat]) -> Complex64 {
        let mut v = [Complex64::new(0.0, 0.0); N];
        v[0] = Complex64::new(1.0, 0.0);
        for op in ops.iter().rev() {
            let mut w = [Complex64::new(0.0, 0.0); N];
            for (i, row) in op.iter().enumerate() {
                w[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            }
            v = w;
        }
        v[0]
    }
}

/// `⟨T̄[backward] T[forward]⟩` for operators tagged with a branch
/// (`true` = forward).
fn contour_ordered(ops: &[(fock::Mat, f64, bool)]) -> Complex64 {
    let mut fwd: Vec<&(fock::Mat, f64, bool)> = ops.iter().filter(|o| o.2).collect();
    let mut bwd: Vec<&(fock::Mat, f64, bool)> = ops.iter().filter(|o| !o.2).collect();
    fwd.sort_by(|a, b| b.1.total_cmp(&a.1));
    bwd.sort_by(|a, b| a.1.total_cmp(&b.1));
    let seq: Vec<&fock::Mat> = bwd.iter().chain(fwd.iter()).map(|o| &o.0).collect();
    fock::vacuum_average(&seq)
}

#[test]
fn contour_ordered_products_factorise_into_pairs() {
    let p = pulse_p();
    let f = p.mode_amplitude();
    let times = [1.0, 3.0, 6.0, 9.0];
    let mats: Vec<fock::Mat> = times.iter().map(|&t| fock::linear(f.eval(t))).collect();
    for branches in 0..16u32 {
        let tagged: Vec<(fock::Mat, f64, bool)> =
            (0..4).map(|k| (mats[k], times[k], branches & (1 << k) != 0)).collect();
        let full = contour_ordered(&tagged);
        let pair = |i: usize, j: usize| contour_ordered(&[tagged[i], tagged[j]]);
        let wick = pair(0, 1) * pair(2, 3) + pair(0, 2) * pair(1, 3) + pair(0, 3) * pair(1, 2);
        assert!((full - wick).norm() < 1e-12, "branches {branches:04b}: {full} vs {wick}");
    }
}

#[test]
fn four_point_wick_matches_direct_pairs() {
    let p = pulse_p();
    let controls = QuadratureControls::default();
    let ts = [2.0, 5.0, 7.5, 9.0];
    let d = |i: usize, j: usize| tn_pair_exact_direct(&p, &p, ts[i], ts[j], controls).unwrap().value;
    let direct = d(0, 1) * d(2, 3) + d(0, 2) * d(1, 3) + d(0, 3) * d(1, 2);
    let wick = tn_multi_exact(&vec![p.clone(); 4], &ts).unwrap();
    assert!((wick.value - direct).norm() < 1e-2 * direct.norm().max(1e-3), "{wick:?} vs {direct}");
}

fn hermitian_realness(r: &TnResult) -> bool {
    r.value.im.abs() <= (10.0 * r.error_estimate).max(1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn exact_pair_symmetric_and_real(t1 in -2.0 * T0..4.0 * T0, t2 in -2.0 * T0..4.0 * T0) {
        let (p, x) = heisenberg_pair(&pulse(), &units());
        let a = tn_pair_exact(&p, &p, t1, t2).unwrap();
        let b = tn_pair_exact(&p, &p, t2, t1).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-10);
        prop_assert!(a.value.im.abs() < 1e-8);
        let px = tn_pair_exact(&p, &x, t1, t2).unwrap();
        let xp = tn_pair_exact(&x, &p, t2, t1).unwrap();
        prop_assert!((px.value - xp.value).norm() < 1e-10);
        prop_assert!(hermitian_realness(&px));
    }

    #[test]
    fn kk_pair_symmetric_and_real(t1 in -2.0 * T0..4.0 * T0, t2 in -2.0 * T0..4.0 * T0) {
        let bps = [0.0, 2.0 * T0];
        prop_assume!(bps.iter().all(|b| (t1 - b).abs() > 0.05 && (t2 - b).abs() > 0.05));
        let p = pulse_p();
        let a = tn_pair_kk(&p, &p, t1, t2).unwrap();
        let b = tn_pair_kk(&p, &p, t2, t1).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-10);
        prop_assert!(hermitian_realness(&a));
    }

    #[test]
    fn exact_average_is_causal(t in -10.0f64..-1e-3, t2 in -10.0f64..-1e-3) {
        let p = pulse_p();
        prop_assert!(tn_pair_exact(&p, &p, t, t2).unwrap().value.norm() < 1e-8);
    }
}

#[test]
fn multi_point_values() {
    let p = pulse_p();
    let one = tn_multi_exact(&[], &[]).unwrap();
    assert_eq!(one.value, Complex64::new(1.0, 0.0));
    assert_eq!(one.path, EvalPath::Wick);
    let two = tn_multi_exact(&[p.clone(), p.clone()], &[3.0, 8.0]).unwrap();
    let pair = tn_pair_exact(&p, &p, 3.0, 8.0).unwrap();
    assert_eq!(two.value, pair.value);
    let eight = tn_multi_exact(&vec![p.clone(); 8], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
    assert!(eight.value.norm().is_finite());
}
