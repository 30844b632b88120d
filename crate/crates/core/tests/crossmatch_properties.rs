use proptest::prelude::*;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajmatch_core::crossmatch::{
    crossmatch_test, null_pmf, p_value, LabeledSample, TieMode,
};

fn cloud(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), n)
}

fn sample() -> impl Strategy<Value = LabeledSample> {
    (1usize..=8).prop_flat_map(|m| {
        let n_choices = if m % 2 == 0 { vec![2, 4, 6, 8] } else { vec![1, 3, 5, 7] };
        (cloud(m), prop::sample::select(n_choices).prop_flat_map(cloud))
            .prop_map(|(x, y)| LabeledSample::new(x, y).unwrap())
    })
}

#[test]
fn pmf_normalisation_and_mean() {
    for m in 2..=60 {
        let d = null_pmf(m, m).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-9, "m = {m}");
        let want = (m * m) as f64 / (2 * m - 1) as f64;
        assert!((d.mean() - want).abs() < 1e-9, "m = {m}");
    }
}

#[test]
fn pmf_agrees_with_label_shuffling() {
    // Fix the matching {0,1},{2,3},...; draw which 10 of the 20 points are X.
    let trials = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0usize; 11];
    for _ in 0..trials {
        let mut is_x = [false; 20];
        for i in index::sample(&mut rng, 20, 10) {
            is_x[i] = true;
        }
        let a1 = (0..10).filter(|&k| is_x[2 * k] != is_x[2 * k + 1]).count();
        counts[a1] += 1;
    }
    let d = null_pmf(10, 10).unwrap();
    for (a1, &c) in counts.iter().enumerate() {
        let empirical = c as f64 / trials as f64;
        assert!((empirical - d.probability(a1)).abs() < 0.02, "a1 = {a1}");
    }
}

proptest! {
    #[test]
    fn result_invariants(s in sample()) {
        let r = crossmatch_test(&s, TieMode::Neutral).unwrap();
        prop_assert_eq!(2 * r.a0 + r.a1, s.m());
        prop_assert_eq!(2 * r.a2 + r.a1, s.n());
        prop_assert_eq!(r.a0 + r.a1 + r.a2, (s.m() + s.n()) / 2);
        prop_assert!(r.a1 <= s.m().min(s.n()));
        prop_assert_eq!(r.a1 % 2, s.m() % 2);
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn label_symmetry(s in sample()) {
        let r = crossmatch_test(&s, TieMode::Neutral).unwrap();
        let swapped = crossmatch_test(&s.swapped(), TieMode::Neutral).unwrap();
        prop_assert_eq!(r.a1, swapped.a1);
        prop_assert_eq!(r.a0, swapped.a2);
        prop_assert_eq!(r.a2, swapped.a0);
        prop_assert_eq!(r.p_value, swapped.p_value);
    }

    #[test]
    fn isometry_invariance(s in sample(), angle in 0.0..std::f64::consts::TAU, dx in -2.0f64..2.0, dy in -2.0f64..2.0) {
        let (sin, cos) = angle.sin_cos();
        let moved = |pts: &[Vec<f64>]| -> Vec<Vec<f64>> {
            pts.iter().map(|p| vec![cos * p[0] - sin * p[1] + dx, sin * p[0] + cos * p[1] + dy]).collect()
        };
        let t = LabeledSample::new(moved(s.points_x()), moved(s.points_y())).unwrap();
        let a = crossmatch_test(&s, TieMode::Neutral).unwrap();
        let b = crossmatch_test(&t, TieMode::Neutral).unwrap();
        prop_assert_eq!(a.a1, b.a1);
        prop_assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn prefer_cross_stays_optimal(s in sample()) {
        use trajmatch_core::crossmatch::crossmatch_statistic;
        let neutral = crossmatch_statistic(&s, TieMode::Neutral).unwrap();
        let cross = crossmatch_statistic(&s, TieMode::PreferCross).unwrap();
        prop_assert!(cross.matching.total_weight <= neutral.matching.total_weight * (1.0 + 1e-12) + 1e-300);
        prop_assert!(cross.a1 >= neutral.a1 || cross.matching.total_weight < neutral.matching.total_weight);
    }

    #[test]
    fn p_value_is_monotone(half in 1usize..40) {
        let m = 2 * half;
        let mut last = 0.0;
        for a1 in (0..=m).step_by(2) {
            let p = p_value(a1, m, m).unwrap();
            prop_assert!(p >= last);
            last = p;
        }
        prop_assert_eq!(last, 1.0);
    }
}

#[test]
fn duplicated_population_prefer_cross_pairs_every_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..50)
        .map(|_| vec![rand::Rng::random::<f64>(&mut rng), rand::Rng::random::<f64>(&mut rng)])
        .collect();
    let s = LabeledSample::new(x.clone(), x).unwrap();
    let r = crossmatch_test(&s, TieMode::PreferCross).unwrap();
    assert_eq!(r.a1, 50);
    assert_eq!(r.p_value, 1.0);
}
