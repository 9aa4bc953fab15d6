mod common;

use common::*;
use leace_core::clustering::{kmeans, KMeansOptions};
use leace_core::linalg::squared_distance;
use leace_core::metrics::ari;
use leace_core::synth::{generate, LoadingSpec, SyntheticConfig};
use rand::Rng;

#[test]
fn deterministic_for_a_seed() {
    let mut r = rng(41);
    let x = gaussian(&mut r, 120, 5);
    let opts = KMeansOptions::default();
    let a = kmeans(&x, 4, 99, &opts).unwrap();
    let b = kmeans(&x, 4, 99, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lloyd_never_increases_inertia() {
    let mut r = rng(42);
    for _ in 0..20 {
        let n = r.random_range(10..100);
        let d = r.random_range(1..6);
        let x = gaussian(&mut r, n, d);
        let k = r.random_range(1..=6.min(n));
        let res = kmeans(&x, k, r.random(), &KMeansOptions::default()).unwrap();
        for w in res.inertia_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{:?}", res.inertia_history);
        }
        assert!(res.inertia <= res.inertia_history.last().unwrap() + 1e-10);
    }
}

#[test]
fn inertia_matches_assignments_under_relabeling() {
    let mut r = rng(43);
    let x = gaussian(&mut r, 80, 3);
    let res = kmeans(&x, 5, 7, &KMeansOptions::default()).unwrap();
    let perm = [3, 0, 4, 1, 2];
    let recomputed: f64 = x
        .row_iter()
        .zip(&res.assignments)
        .map(|(row, &a)| squared_distance(row, res.centroids.row(a)))
        .sum();
    let relabeled: f64 = x
        .row_iter()
        .zip(res.assignments.iter().map(|&a| perm[a]))
        .map(|(row, a)| {
            let c = perm.iter().position(|&p| p == a).unwrap();
            squared_distance(row, res.centroids.row(c))
        })
        .sum();
    assert!((recomputed - res.inertia).abs() <= 1e-9 * res.inertia.max(1.0));
    assert_eq!(recomputed, relabeled);
    // and every point sits with its nearest centroid
    for (row, &a) in x.row_iter().zip(&res.assignments) {
        let own = squared_distance(row, res.centroids.row(a));
        assert!(res.centroids.row_iter().all(|c| own <= squared_distance(row, c) + 1e-12));
    }
}

#[test]
fn recovers_well_separated_topics() {
    let cfg = SyntheticConfig {
        loading_z: LoadingSpec::RandomOrthogonal { random_orthogonal: 3.0 },
        loading_c: LoadingSpec::Explicit(vec![vec![0.0; 2]; 64]),
        seed: 5,
        ..SyntheticConfig::default_acceptance()
    };
    let corpus = generate(&cfg.resolve().unwrap()).unwrap();
    let res = kmeans(&corpus.x, 6, 0, &KMeansOptions::default()).unwrap();
    assert!(ari(&res.assignments, corpus.gold.codes()).unwrap() >= 0.95);
}
