mod common;

use common::*;
use leace_core::linalg::{covariance, inv_sqrt_psd, pca, pinv, pinv_with_rank, sym_eig, Matrix};
use rand::Rng;

fn moore_penrose_errors(a: &Matrix, g: &Matrix) -> [f64; 4] {
    let ag = a.matmul(g).unwrap();
    let ga = g.matmul(a).unwrap();
    [
        rel_diff(&ag.matmul(a).unwrap(), a),
        rel_diff(&ga.matmul(g).unwrap(), g),
        ag.asymmetry(),
        ga.asymmetry(),
    ]
}

#[test]
fn pinv_moore_penrose_on_random_matrices() {
    let mut r = rng(11);
    for trial in 0..100 {
        let rows = r.random_range(1..=8);
        let cols = r.random_range(1..=8);
        let rank = r.random_range(0..=rows.min(cols));
        let a = if rank == 0 { Matrix::zeros(rows, cols) } else { low_rank(&mut r, rows, cols, rank) };
        let p = pinv_with_rank(&a, 1e-10).unwrap();
        assert_eq!(p.rank, rank, "trial {trial}");
        for (i, e) in moore_penrose_errors(&a, &p.inverse).iter().enumerate() {
            assert!(*e <= 1e-8, "trial {trial} identity {i}: {e:e}");
        }
    }
}

#[test]
fn pinv_moore_penrose_on_psd_matrices() {
    let mut r = rng(12);
    for trial in 0..100 {
        let d = r.random_range(1..=10);
        let rank = r.random_range(1..=d);
        let a = psd(&mut r, d, rank);
        let g = pinv(&a, 1e-10).unwrap();
        for e in moore_penrose_errors(&a, &g) {
            assert!(e <= 1e-8, "trial {trial}: {e:e}");
        }
    }
}

#[test]
fn inv_sqrt_gives_range_projector() {
    let mut r = rng(13);
    for trial in 0..100 {
        let d = r.random_range(1..=10);
        let rank = r.random_range(1..=d);
        let m = psd(&mut r, d, rank);
        let w = inv_sqrt_psd(&m, 1e-10).unwrap();
        let proj = w.matmul(&m).unwrap().matmul(&w).unwrap();
        let sq = proj.matmul(&proj).unwrap();
        assert!(sq.sub(&proj).unwrap().frobenius_norm() <= 1e-8, "trial {trial}");
        assert!(proj.asymmetry() <= 1e-8);
        // trace of a projector is its rank
        let trace: f64 = (0..d).map(|i| proj[(i, i)]).sum();
        assert!((trace - rank as f64).abs() <= 1e-8, "trial {trial}: trace {trace}");
        // and it fixes the range of m
        assert!(rel_diff(&proj.matmul(&m).unwrap(), &m) <= 1e-8);
    }
}

#[test]
fn sym_eig_reconstructs() {
    let mut r = rng(14);
    for _ in 0..100 {
        let g = gaussian(&mut r, 5, 5);
        let s = g.add(&g.transpose()).unwrap();
        let e = sym_eig(&s).unwrap();
        let rebuilt = e.spectral_map(|l| l);
        assert!(rel_diff(&rebuilt, &s) <= 1e-9);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn covariance_is_transpose_symmetric() {
    let mut r = rng(15);
    for _ in 0..50 {
        let n = r.random_range(2..40);
        let (dx, dy) = (r.random_range(1..6), r.random_range(1..6));
        let x = gaussian(&mut r, n, dx);
        let y = gaussian(&mut r, n, dy);
        let a = covariance(&x, &y).unwrap().transpose();
        let b = covariance(&y, &x).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }
}

#[test]
fn pca_ratios_are_a_distribution() {
    let mut r = rng(16);
    for _ in 0..30 {
        let d = r.random_range(1..6);
        let n = d + r.random_range(2..20);
        let x = gaussian(&mut r, n, d);
        let p = pca(&x, d).unwrap();
        let ratios = &p.explained_variance_ratio;
        assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
        assert!(ratios.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((ratios.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}
