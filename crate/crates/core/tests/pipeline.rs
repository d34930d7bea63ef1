use densap_core::datasets::{generate, DatasetKind, GenSpec};
use densap_core::metrics::brute_force_optimum;
use densap_core::{
    affinity_propagation, energy, install_preferences, lap_cluster, neg_sq_euclidean, pap_cluster, ApConfig,
    ClusteringResult, LapConfig, PapConfig, PointSet, PreferenceSpec, SimilarityMatrix,
};
use proptest::prelude::*;

fn similarities(kind: DatasetKind, n: usize, seed: u64) -> SimilarityMatrix {
    let points = generate(&GenSpec::new(kind, n, seed)).unwrap();
    install_preferences(neg_sq_euclidean(&points).unwrap(), &PreferenceSpec::Median).unwrap()
}

fn assert_valid(s: &SimilarityMatrix, r: &ClusteringResult) {
    assert_eq!(r.idx.len(), s.n());
    assert!(r.is_valid_configuration());
    for (i, &e) in r.idx.iter().enumerate() {
        assert_eq!(r.idx[e], e, "point {i} assigned to non-exemplar {e}");
    }
    for &e in &r.exemplars {
        assert_eq!(r.idx[e], e);
    }
    assert!((r.netsim - (r.dpsim + r.expref)).abs() <= 1e-9);
    assert!((energy(s, &r.idx).unwrap() + r.netsim).abs() <= 1e-9 * r.netsim.abs().max(1.0));
}

#[test]
fn every_algorithm_on_every_dataset() {
    for kind in DatasetKind::ALL {
        let s = similarities(kind, 240, 11);
        let ap = affinity_propagation(&s, &ApConfig::default(), None).unwrap();
        assert_valid(&s, &ap);
        let pap = pap_cluster(&s, &PapConfig::default()).unwrap();
        assert_valid(&s, &pap.result);
        let lap = lap_cluster(
            &s,
            &LapConfig {
                num_landmarks: 60,
                ..LapConfig::default()
            },
        )
        .unwrap();
        assert_valid(&s, &lap.result);
        assert!(lap.refine_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{kind}");
    }
}

#[test]
fn explicit_points_and_preferences() {
    let points = PointSet::new(vec![vec![0.0], vec![0.1], vec![10.0], vec![10.2]]).unwrap();
    let s = neg_sq_euclidean(&points).unwrap();
    let s = install_preferences(s, &PreferenceSpec::Uniform(-1.0)).unwrap();
    let r = affinity_propagation(&s, &ApConfig::default(), None).unwrap();
    assert_eq!(r.num_clusters(), 2);
    assert_eq!(r.idx[0], r.idx[1]);
    assert_eq!(r.idx[2], r.idx[3]);
    assert_ne!(r.idx[0], r.idx[2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_optimum_dominates(
        coords in proptest::collection::vec(0.0f64..1.0, 2..=16),
    ) {
        let rows: Vec<Vec<f64>> = coords.chunks_exact(2).map(<[f64]>::to_vec).collect();
        prop_assume!(!rows.is_empty());
        let s = install_preferences(
            neg_sq_euclidean(&PointSet::new(rows).unwrap()).unwrap(),
            &PreferenceSpec::Median,
        ).unwrap();
        let best = brute_force_optimum(&s).unwrap();
        let ap = affinity_propagation(&s, &ApConfig::default(), None).unwrap();
        assert_valid(&s, &best);
        assert_valid(&s, &ap);
        prop_assert!(best.netsim >= ap.netsim - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn optimal_exemplar_count_grows_with_preference(
        coords in proptest::collection::vec(0.0f64..1.0, 16),
        low in -2.0f64..0.0,
        step in 0.0f64..2.0,
    ) {
        let rows: Vec<Vec<f64>> = coords.chunks_exact(2).map(<[f64]>::to_vec).collect();
        let base = neg_sq_euclidean(&PointSet::new(rows).unwrap()).unwrap();
        let count = |p: f64| {
            let s = install_preferences(base.clone(), &PreferenceSpec::Uniform(p)).unwrap();
            brute_force_optimum(&s).unwrap().num_clusters()
        };
        prop_assert!(count(low) <= count(low + step));
    }
}
