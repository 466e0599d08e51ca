mod support;

use mfjump::measure::{flow_sup_w1, w1, w2, EmpiricalMeasure, MeasureFlow};
use mfjump::grid::TimeGrid;
use mfjump::noise::rng::CounterRng;
use proptest::prelude::*;
use rand::Rng;
use support::lp::transport_cost;
use support::weighted;

fn random_measure(rng: &mut CounterRng, max_atoms: usize) -> EmpiricalMeasure {
    let k = rng.random_range(1..=max_atoms);
    let xs: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
    let ws: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    weighted(&xs, &ws)
}

fn atoms(m: &EmpiricalMeasure) -> Vec<(f64, f64)> {
    m.atoms().collect()
}

#[test]
fn lp_oracle_small_examples() {
    let a = [(0.0, 0.5), (2.0, 0.5)];
    let b = [(1.0, 0.5), (3.0, 0.5)];
    assert!((transport_cost(&a, &b, 1) - 1.0).abs() < 1e-12);
    assert!((transport_cost(&a, &b, 2) - 1.0).abs() < 1e-12);
    assert!((transport_cost(&[(0.0, 1.0)], &[(1.0, 1.0)], 1) - 1.0).abs() < 1e-12);
}

#[test]
fn documented_examples() {
    let d0 = EmpiricalMeasure::dirac(0.0);
    let d1 = EmpiricalMeasure::dirac(1.0);
    assert_eq!(w1(&d0, &d1), 1.0);
    assert_eq!(w2(&d0, &d1), 1.0);
    let a = EmpiricalMeasure::from_samples(&[0.0, 2.0]).unwrap();
    let b = EmpiricalMeasure::from_samples(&[1.0, 3.0]).unwrap();
    assert_eq!(w1(&a, &b), 1.0);
    assert_eq!(w2(&a, &b), 1.0);
    assert_eq!(w1(&a, &a), 0.0);
}

#[test]
fn matches_lp_on_random_instances() {
    let mut rng = CounterRng::keyed(2024, &[]);
    for _ in 0..200 {
        let m1 = random_measure(&mut rng, 6);
        let m2 = random_measure(&mut rng, 6);
        let lp1 = transport_cost(&atoms(&m1), &atoms(&m2), 1);
        let lp2 = transport_cost(&atoms(&m1), &atoms(&m2), 2).sqrt();
        assert!((w1(&m1, &m2) - lp1).abs() < 1e-10, "{m1:?} {m2:?}");
        assert!((w2(&m1, &m2) - lp2).abs() < 1e-10, "{m1:?} {m2:?}");
    }
}

#[test]
fn flow_distance_is_max_of_node_oracles() {
    let grid = TimeGrid::with_steps(1.0, 3).unwrap();
    let mut rng = CounterRng::keyed(7, &[]);
    let f1: Vec<_> = (0..4).map(|_| random_measure(&mut rng, 4)).collect();
    let f2: Vec<_> = (0..4).map(|_| random_measure(&mut rng, 4)).collect();
    let oracle = f1
        .iter()
        .zip(&f2)
        .map(|(a, b)| transport_cost(&atoms(a), &atoms(b), 1))
        .fold(0.0, f64::max);
    let a = MeasureFlow::new(grid.clone(), f1).unwrap();
    let b = MeasureFlow::new(grid, f2).unwrap();
    assert!((flow_sup_w1(&a, &b).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn flow_distance_sees_single_node_shift() {
    let grid = TimeGrid::with_steps(1.0, 2).unwrap();
    let m = EmpiricalMeasure::from_samples(&[0.0, 1.0, 5.0]).unwrap();
    let a = MeasureFlow::constant(grid.clone(), m.clone());
    let b = MeasureFlow::new(grid, vec![m.clone(), m.shifted(0.3), m]).unwrap();
    assert!((flow_sup_w1(&a, &b).unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(flow_sup_w1(&a, &a).unwrap(), 0.0);
    let other = MeasureFlow::constant(TimeGrid::with_steps(1.0, 3).unwrap(), EmpiricalMeasure::dirac(0.0));
    assert!(flow_sup_w1(&a, &other).is_err());
}

#[test]
fn fifth_moment_of_normal_samples() {
    // oracle: E|Z|^5 = 8 sqrt(2/pi), and an independent large-sample estimate
    let normal = mfjump::model::ScalarLaw::Normal { mean: 0.0, sd: 1.0 };
    let mut rng = CounterRng::keyed(5, &[1]);
    let small: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
    let mut rng = CounterRng::keyed(5, &[2]);
    let big: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
    let exact = 8.0 * (2.0 / std::f64::consts::PI).sqrt();
    let est = EmpiricalMeasure::from_sample_vec(small).unwrap().abs_moment(5.0);
    let oracle = EmpiricalMeasure::from_sample_vec(big).unwrap().abs_moment(5.0);
    assert!((oracle - exact).abs() / exact < 0.02);
    assert!((est - oracle).abs() / oracle < 0.15, "{est} vs {oracle}");
}

fn measure_strategy() -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec((-10.0f64..10.0, 0.01f64..1.0), 1..12).prop_map(|v| {
        let (xs, ws): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        weighted(&xs, &ws)
    })
}

proptest! {
    #[test]
    fn metric_axioms(a in measure_strategy(), b in measure_strategy(), c in measure_strategy()) {
        prop_assert_eq!(w1(&a, &b), w1(&b, &a));
        prop_assert_eq!(w2(&a, &b), w2(&b, &a));
        prop_assert_eq!(w1(&a, &a), 0.0);
        prop_assert_eq!(w2(&a, &a), 0.0);
        prop_assert!(w1(&a, &c) <= w1(&a, &b) + w1(&b, &c) + 1e-10);
        prop_assert!(w2(&a, &c) <= w2(&a, &b) + w2(&b, &c) + 1e-10);
    }

    #[test]
    fn w1_below_w2(a in measure_strategy(), b in measure_strategy()) {
        prop_assert!(w1(&a, &b) <= w2(&a, &b) + 1e-12);
    }

    #[test]
    fn pairing_dominates_w1(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..30)) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let paired = pairs.iter().map(|(x, y)| (x - y).abs()).sum::<f64>() / pairs.len() as f64;
        let d = w1(&EmpiricalMeasure::from_samples(&xs).unwrap(), &EmpiricalMeasure::from_samples(&ys).unwrap());
        prop_assert!(d <= paired + 1e-10);
    }

    #[test]
    fn lipschitz_test_functions_bound_w1(
        a in measure_strategy(),
        b in measure_strategy(),
        slope in -1.0f64..1.0,
        kink in -10.0f64..10.0,
        freq in 0.0f64..3.0,
    ) {
        // each g below is 1-Lipschitz
        let tests: [Box<dyn Fn(f64) -> f64>; 3] = [
            Box::new(move |x| slope * x),
            Box::new(move |x| (x - kink).abs()),
            Box::new(move |x| if freq > 0.0 { (freq * x).sin() / freq } else { 0.0 }),
        ];
        let d = w1(&a, &b);
        for g in &tests {
            prop_assert!(a.integrate(g) - b.integrate(g) <= d + 1e-10);
        }
    }

    #[test]
    fn translation_invariance(a in measure_strategy(), b in measure_strategy(), h in -5.0f64..5.0) {
        let d = w1(&a, &b);
        prop_assert!((w1(&a.shifted(h), &b.shifted(h)) - d).abs() < 1e-9);
        prop_assert!((w1(&a.shifted(h), &a) - h.abs()).abs() < 1e-9);
        prop_assert!((w2(&a.shifted(h), &a) - h.abs()).abs() < 1e-9);
    }

    #[test]
    fn mixtures_scale_w1(a in measure_strategy(), b in measure_strategy(), t in 0.05f64..0.95) {
        // F_mix - F_b = t (F_a - F_b), so W1(t a + (1-t) b, b) = t W1(a, b)
        let mix: Vec<(f64, f64)> = a
            .atoms()
            .map(|(x, w)| (x, t * w))
            .chain(b.atoms().map(|(x, w)| (x, (1.0 - t) * w)))
            .collect();
        let mix = EmpiricalMeasure::new(mix).unwrap();
        prop_assert!((w1(&mix, &b) - t * w1(&a, &b)).abs() < 1e-9);
    }
}
