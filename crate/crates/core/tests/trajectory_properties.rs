use proptest::prelude::*;
use trajmatch_core::trajectory::{apply_scaling, compute_scaling, Population, ScalingParams, Trajectory, TrajectoryStore};

fn trajectory(algorithm: &'static str, lo: f64, hi: f64) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(prop::collection::vec((prop::collection::vec(lo..hi, 2), lo..hi), 4), 1..4).prop_map(
        move |pops| Trajectory {
            algorithm_id: algorithm.into(),
            problem_id: "p".into(),
            dimension: 2,
            run: 0,
            populations: pops
                .into_iter()
                .enumerate()
                .map(|(i, members)| {
                    let (solutions, fitness) = members.into_iter().unzip();
                    Population { iteration: i, solutions, fitness }
                })
                .collect(),
        },
    )
}

proptest! {
    #[test]
    fn unit_params_are_identity(t in trajectory("a", 0.0, 1.0)) {
        let params = ScalingParams {
            problem_id: "p".into(),
            dimension: 2,
            solution_bounds: vec![(0.0, 1.0); 2],
            fitness_bounds: (0.0, 1.0),
        };
        prop_assert_eq!(apply_scaling(&t, &params).unwrap(), t);
    }

    #[test]
    fn scaling_round_trips(t in trajectory("a", -5.0, 5.0)) {
        let store = TrajectoryStore::from_trajectories([t.clone()]).unwrap();
        let params = compute_scaling(&store, "p", 2).unwrap();
        let scaled = apply_scaling(&t, &params).unwrap();
        for (p, q) in t.populations.iter().zip(&scaled.populations) {
            for (x, y) in p.solutions.iter().zip(&q.solutions) {
                for (k, (&v, &s)) in x.iter().zip(y).enumerate() {
                    let (lo, hi) = params.solution_bounds[k];
                    let back = if hi > lo { s * (hi - lo) + lo } else { lo };
                    prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn scaled_algorithms_share_the_unit_box(
        a in trajectory("a", -5.0, 0.0),
        b in trajectory("b", -1.0, 5.0),
    ) {
        prop_assume!(a.iterations() == b.iterations());
        let store = TrajectoryStore::from_trajectories([a.clone(), b.clone()]).unwrap();
        let params = compute_scaling(&store, "p", 2).unwrap();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for t in [&a, &b] {
            for p in &apply_scaling(t, &params).unwrap().populations {
                for (x, &f) in p.solutions.iter().zip(&p.fitness) {
                    for (k, v) in x.iter().copied().chain([f]).enumerate() {
                        prop_assert!((0.0..=1.0).contains(&v));
                        lo[k] = lo[k].min(v);
                        hi[k] = hi[k].max(v);
                    }
                }
            }
        }
        for k in 0..3 {
            prop_assert_eq!(lo[k], 0.0);
            prop_assert!(hi[k] == 1.0 || hi[k] == 0.0);
        }
    }
}
