mod common;

use common::*;
use leace_core::eraser::ConceptLabels;
use leace_core::metrics::{ari, linear_probe_accuracy, pearson, purity, recall_at_k, Similarity};
use rand::Rng;

/// Pair-counting ARI straight from the definition, over all n(n−1)/2 pairs.
fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let pairs = both + only_a + only_b + neither;
    let expected = ((both + only_a) * (both + only_b) + (only_b + neither) * (only_a + neither)) / pairs;
    let num = both + neither - expected;
    let den = pairs - expected;
    if den == 0.0 {
        // both partitions trivial in the same way
        let same = (0..n).all(|i| (0..n).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
        return if same { 1.0 } else { 0.0 };
    }
    num / den
}

fn brute_purity(assign: &[usize], gold: &[usize]) -> f64 {
    let mut clusters: Vec<usize> = assign.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let hits: usize = clusters
        .iter()
        .map(|&c| {
            let members: Vec<usize> = (0..assign.len()).filter(|&i| assign[i] == c).map(|i| gold[i]).collect();
            members.iter().map(|g| members.iter().filter(|h| *h == g).count()).max().unwrap()
        })
        .sum();
    hits as f64 / assign.len() as f64
}

fn random_partition(r: &mut rand_chacha::ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| r.random_range(0..k)).collect()
}

#[test]
fn agree_with_brute_force_on_small_partitions() {
    let mut r = rng(31);
    for trial in 0..100 {
        let n = r.random_range(2..=30);
        let ka = r.random_range(1..=6);
        let kb = r.random_range(1..=6);
        let a = random_partition(&mut r, n, ka);
        let b = random_partition(&mut r, n, kb);
        let got = ari(&a, &b).unwrap();
        let want = brute_ari(&a, &b);
        assert!((got - want).abs() <= 1e-12, "trial {trial}: ari {got} vs {want}");
        let got = purity(&a, &b).unwrap();
        let want = brute_purity(&a, &b);
        assert!((got - want).abs() <= 1e-12, "trial {trial}: purity {got} vs {want}");
    }
}

#[test]
fn ari_basic_identities() {
    let mut r = rng(32);
    for _ in 0..50 {
        let n = r.random_range(2..=30);
        let a = random_partition(&mut r, n, 4);
        let b = random_partition(&mut r, n, 3);
        assert!((ari(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        assert!((ari(&a, &b).unwrap() - ari(&b, &a).unwrap()).abs() <= 1e-12);
        let relabeled: Vec<usize> = a.iter().map(|v| 7 - v).collect();
        assert!((ari(&relabeled, &b).unwrap() - ari(&a, &b).unwrap()).abs() <= 1e-12);
        assert_eq!(purity(&relabeled, &b).unwrap(), purity(&a, &b).unwrap());
    }
    let balanced: Vec<usize> = (0..12).map(|i| i % 3).collect();
    assert!(ari(&[0; 12], &balanced).unwrap().abs() <= 1e-12);
}

#[test]
fn ari_of_independent_partitions_centres_on_zero() {
    let mut r = rng(33);
    let mean = (0..200)
        .map(|_| {
            let a = random_partition(&mut r, 60, 4);
            let b = random_partition(&mut r, 60, 4);
            ari(&a, &b).unwrap()
        })
        .sum::<f64>()
        / 200.0;
    assert!(mean.abs() <= 0.05, "mean ARI {mean}");
}

#[test]
fn purity_bounds() {
    let mut r = rng(34);
    for _ in 0..50 {
        let n = r.random_range(1..=30);
        let a = random_partition(&mut r, n, 5);
        let g = random_partition(&mut r, n, 3);
        let p = purity(&a, &g).unwrap();
        let biggest = (0..3).map(|c| g.iter().filter(|&&v| v == c).count()).max().unwrap();
        assert!(p <= 1.0 && p + 1e-12 >= biggest as f64 / n as f64);
    }
}

#[test]
fn recall_is_monotone_and_rotation_invariant() {
    let mut r = rng(35);
    for _ in 0..10 {
        let d = r.random_range(2..=8);
        let x = gaussian(&mut r, 40, d);
        let pairs: Vec<(usize, usize)> = (0..20).map(|i| (2 * i, 2 * i + 1)).collect();
        let ks = [1, 2, 5, 10, 39];
        let before = recall_at_k(&x, &pairs, None, &ks, Similarity::Cosine).unwrap();
        let values: Vec<f64> = ks.iter().map(|k| before.recall_at[k]).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
        assert_eq!(values[4], 1.0);
        let rot = orthogonal(&mut r, d);
        let rotated = x.matmul(&rot.transpose()).unwrap();
        let after = recall_at_k(&rotated, &pairs, None, &ks, Similarity::Cosine).unwrap();
        assert_eq!(before.recall_at, after.recall_at);
        assert_eq!(before.ranks, after.ranks);
    }
}

#[test]
fn pearson_ignores_positive_affine_maps() {
    let mut r = rng(36);
    for _ in 0..50 {
        let n = r.random_range(3..40);
        let u: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let (a, b) = (r.random_range(0.1..10.0), r.random_range(-10.0..10.0));
        let base = pearson(&u, &v).unwrap();
        let mapped: Vec<f64> = u.iter().map(|x| a * x + b).collect();
        assert!((pearson(&mapped, &v).unwrap() - base).abs() <= 1e-12);
        assert!((pearson(&v, &mapped).unwrap() - base).abs() <= 1e-12);
    }
}

#[test]
fn probe_never_below_majority() {
    let mut r = rng(37);
    for _ in 0..20 {
        let d = r.random_range(1..=6);
        let k = r.random_range(2..=4);
        let n = r.random_range(10..80);
        let x = gaussian(&mut r, n, d);
        let codes = labels(&mut r, n, k);
        let c = ConceptLabels::from_codes(codes, k).unwrap();
        assert!(linear_probe_accuracy(&x, &c, 1e-6, 1e-9).unwrap() >= c.majority_rate());
    }
}
