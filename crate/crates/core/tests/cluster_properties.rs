use proptest::prelude::*;
use trajmatch_core::cluster::{ward_cluster, Dissimilarity};

fn dissimilarity(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0.0f64..=1.0, n * (n - 1) / 2).prop_map(move |upper| {
        let mut e = vec![vec![0.0; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                e[i][j] = upper[k];
                e[j][i] = upper[k];
                k += 1;
            }
        }
        e
    })
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("alg{i}")).collect()
}

proptest! {
    #[test]
    fn heights_are_monotone(e in (2usize..10).prop_flat_map(dissimilarity)) {
        let n = e.len();
        let dg = ward_cluster(&Dissimilarity::new(ids(n), e).unwrap()).unwrap();
        prop_assert_eq!(dg.merges.len(), n - 1);
        prop_assert!(dg.merges.windows(2).all(|w| w[0].height <= w[1].height));
        prop_assert!(dg.validate().is_ok());
    }

    #[test]
    fn leaf_permutation_gives_isomorphic_tree(
        (e, perm) in (2usize..9).prop_flat_map(|n| {
            (dissimilarity(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let n = e.len();
        let names = ids(n);
        let a = ward_cluster(&Dissimilarity::new(names.clone(), e.clone()).unwrap()).unwrap();
        let mut pe = vec![vec![0.0; n]; n];
        let mut pnames = vec![String::new(); n];
        for i in 0..n {
            pnames[perm[i]] = names[i].clone();
            for j in 0..n {
                pe[perm[i]][perm[j]] = e[i][j];
            }
        }
        let b = ward_cluster(&Dissimilarity::new(pnames, pe).unwrap()).unwrap();
        for (x, y) in a.merges.iter().zip(&b.merges) {
            prop_assert!((x.height - y.height).abs() <= 1e-12);
        }
        // Unless two candidate merges tie in height, the clusters coincide.
        let distinct = a.merges.windows(2).all(|w| (w[1].height - w[0].height).abs() > 1e-9);
        if distinct {
            let clusters = |dg: &trajmatch_core::cluster::Dendrogram| -> Vec<Vec<String>> {
                dg.merges
                    .iter()
                    .map(|m| {
                        let mut l: Vec<String> = dg.leaves_under(m.node).into_iter().map(|i| dg.leaves[i].clone()).collect();
                        l.sort();
                        l
                    })
                    .collect()
            };
            prop_assert_eq!(clusters(&a), clusters(&b));
        }
    }
}
