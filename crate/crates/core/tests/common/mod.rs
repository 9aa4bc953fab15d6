#![allow(dead_code)]

use leace_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// `rows × cols` of rank at most `rank`, built as a product of Gaussians.
pub fn low_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> Matrix {
    gaussian(rng, rows, rank).matmul(&gaussian(rng, rank, cols)).unwrap()
}

/// Random PSD matrix `G Gᵀ` of the given rank.
pub fn psd(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> Matrix {
    let g = gaussian(rng, d, rank);
    g.matmul(&g.transpose()).unwrap()
}

/// Haar-ish orthogonal matrix from Gram–Schmidt on a Gaussian.
pub fn orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let g = gaussian(rng, d, d);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..d {
        let mut v = g.column_values(j);
        for q in &cols {
            let p: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|a| a / n).collect());
    }
    let mut data = vec![0.0; d * d];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            data[i * d + j] = c[i];
        }
    }
    Matrix::new(d, d, data).unwrap()
}

/// Uniform labels in `0..k`, redrawn until every label appears.
pub fn labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    loop {
        let v: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        if (0..k).all(|c| v.contains(&c)) {
            return v;
        }
    }
}

pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1.0)
}

pub mod oracle;

/// Gaussian rows with a random per-class shift and a random linear mixing,
/// so the concept is correlated with several coordinates.
pub fn concept_data(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> (Matrix, Vec<usize>) {
    let codes = labels(rng, n, k);
    let shifts = gaussian(rng, k, d);
    let mix = gaussian(rng, d, d);
    let base = gaussian(rng, n, d).matmul(&mix).unwrap();
    let mut data = base.into_data();
    for (i, &c) in codes.iter().enumerate() {
        for j in 0..d {
            data[i * d + j] += 2.0 * shifts[(c, j)];
        }
    }
    (Matrix::new(n, d, data).unwrap(), codes)
}
