//! Seeded k-means with k-means++ initialization and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 300, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    pub inertia: f64,
    /// Lloyd iterations run by the winning restart.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
}

/// Clusters the rows of `x` into `k` groups.
///
/// Restart `r` draws from a ChaCha stream seeded with `seed` on stream `r`, so
/// results depend only on `(x, k, seed, opts)`. The restart with the lowest
/// inertia wins; ties go to the earlier restart.
pub fn kmeans(x: &Matrix, k: usize, seed: u64, opts: &KMeansOptions) -> Result<ClusterResult> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::dim(format!("k must be in 1..={n}, got {k}")));
    }
    if opts.restarts == 0 || opts.max_iter == 0 {
        return Err(Error::Validation("restarts and max_iter must be positive".into()));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::Validation(format!("tolerance must be non-negative, got {}", opts.tol)));
    }

    let mut best: Option<ClusterResult> = None;
    for restart in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let init = plus_plus_init(x, k, &mut rng);
        let mut run = lloyd(x, init, opts);
        run.restarts_used = opts.restarts;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn plus_plus_init(x: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = x.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = x.row_iter().map(|r| squared_distance(r, x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (d, r) in nearest.iter_mut().zip(x.row_iter()) {
            *d = d.min(squared_distance(r, x.row(next)));
        }
    }
    x.select_rows(&chosen).expect("indices in range")
}

fn assign(x: &Matrix, centroids: &Matrix, assignments: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, row) in x.row_iter().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.row_iter().enumerate() {
            let d = squared_distance(row, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        assignments[i] = best.0;
        dists[i] = best.1;
        inertia += best.1;
    }
    inertia
}

/// Moves the point farthest from its centroid into each empty cluster.
fn fill_empty(k: usize, assignments: &mut [usize], dists: &mut [f64]) {
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let donor = (0..assignments.len())
            .filter(|&i| sizes[assignments[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
            .expect("k <= n guarantees a cluster with two members");
        assignments[donor] = empty;
        dists[donor] = 0.0;
    }
}

fn update_centroids(x: &Matrix, k: usize, assignments: &[usize]) -> Matrix {
    let d = x.cols();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (row, &a) in x.row_iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(row) {
            *s += v;
        }
    }
    for c in 0..k {
        let n = counts[c].max(1) as f64;
        sums[c * d..(c + 1) * d].iter_mut().for_each(|s| *s /= n);
    }
    Matrix::from_vec_unchecked(k, d, sums)
}

fn lloyd(x: &Matrix, mut centroids: Matrix, opts: &KMeansOptions) -> ClusterResult {
    let n = x.rows();
    let k = centroids.rows();
    let mut assignments = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        history.push(assign(x, &centroids, &mut assignments, &mut dists));
        fill_empty(k, &mut assignments, &mut dists);
        let next = update_centroids(x, k, &assignments);
        let shift = centroids
            .row_iter()
            .zip(next.row_iter())
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = next;
        if shift < opts.tol {
            break;
        }
    }
    // report assignments and inertia consistent with the final centroids
    let mut inertia = assign(x, &centroids, &mut assignments, &mut dists);
    let before = assignments.clone();
    fill_empty(k, &mut assignments, &mut dists);
    if assignments != before {
        centroids = update_centroids(x, k, &assignments);
        inertia = x
            .row_iter()
            .zip(&assignments)
            .map(|(r, &a)| squared_distance(r, centroids.row(a)))
            .sum();
    }
    ClusterResult {
        assignments,
        centroids,
        inertia,
        iterations,
        restarts_used: 0,
        inertia_history: history,
    }
}
