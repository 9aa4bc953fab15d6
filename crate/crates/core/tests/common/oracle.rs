//! Independent check of the minimum-distortion erasure map.
//!
//! Any affine `x ↦ P x + b` with `P Σ_XC = 0` leaves every coordinate
//! uncorrelated with the concept. Writing `P = G Nᵀ`, with `N` an orthonormal
//! basis of the complement of `col(Σ_XC)`, makes the constraint implicit; the
//! mean squared displacement is then a convex quadratic in `G`, solved here
//! row by row with conjugate gradient. Nothing from the library's whitening
//! or pseudoinverse code is used.

use leace_core::linalg::Matrix;

pub struct OracleFit {
    pub proj: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    pub mean_squared_distortion: f64,
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(vectors: &[Vec<f64>], against: &[Vec<f64>], keep_above: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = against.to_vec();
    let mut added = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two rounds of Gram–Schmidt for stability
        for _ in 0..2 {
            for q in &basis {
                let p = dotv(&w, q);
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
            }
        }
        let norm = dotv(&w, &w).sqrt();
        if norm > keep_above {
            let q: Vec<f64> = w.iter().map(|a| a / norm).collect();
            basis.push(q.clone());
            added.push(q);
        }
    }
    added
}

/// Solves `g A = rhs` for symmetric positive definite `A`.
fn conjugate_gradient(a: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let mul = |v: &[f64]| -> Vec<f64> { (0..m).map(|i| dotv(&a[i], v)).collect() };
    let mut g = vec![0.0; m];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = dotv(&r, &r);
    let stop = 1e-28 * rr.max(1e-300);
    for _ in 0..(50 * m.max(1)) {
        if rr <= stop {
            break;
        }
        let ap = mul(&p);
        let alpha = rr / dotv(&p, &ap);
        g.iter_mut().zip(&p).for_each(|(x, y)| *x += alpha * y);
        r.iter_mut().zip(&ap).for_each(|(x, y)| *x -= alpha * y);
        let next = dotv(&r, &r);
        p = r.iter().zip(&p).map(|(ri, pi)| ri + (next / rr) * pi).collect();
        rr = next;
    }
    g
}

pub fn fit(x: &Matrix, codes: &[usize], k: usize) -> OracleFit {
    let (n, d) = x.shape();
    let nf = n as f64;
    let mu: Vec<f64> = (0..d).map(|j| x.row_iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let prior: Vec<f64> = (0..k).map(|c| codes.iter().filter(|&&v| v == c).count() as f64 / nf).collect();

    let mut sigma = vec![vec![0.0; d]; d];
    let mut cross = vec![vec![0.0; d]; k]; // stored by concept column
    for (row, &c) in x.row_iter().zip(codes) {
        let xc: Vec<f64> = row.iter().zip(&mu).map(|(a, m)| a - m).collect();
        for i in 0..d {
            for j in 0..d {
                sigma[i][j] += xc[i] * xc[j] / nf;
            }
            for col in 0..k {
                let ind = if col == c { 1.0 } else { 0.0 };
                cross[col][i] += xc[i] * (ind - prior[col]) / nf;
            }
        }
    }

    let scale = cross.iter().map(|v| dotv(v, v).sqrt()).fold(0.0, f64::max);
    let concept_span = orthonormalize(&cross, &[], 1e-9 * scale.max(1e-300));
    let units: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    let complement = orthonormalize(&units, &concept_span, 1e-6);
    let m = complement.len();

    // A = Nᵀ Σ N, B = Σ N
    let sn: Vec<Vec<f64>> = (0..d).map(|i| complement.iter().map(|q| dotv(&sigma[i], q)).collect()).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| (0..d).map(|i| complement[r][i] * sn[i][c]).sum()).collect())
        .collect();

    let proj: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let g = conjugate_gradient(&a, &sn[i]);
            (0..d).map(|j| (0..m).map(|t| g[t] * complement[t][j]).sum()).collect()
        })
        .collect();
    let offset: Vec<f64> = (0..d).map(|i| mu[i] - dotv(&proj[i], &mu)).collect();
    let mean_squared_distortion = x
        .row_iter()
        .map(|row| (0..d).map(|i| (dotv(&proj[i], row) + offset[i] - row[i]).powi(2)).sum::<f64>())
        .sum::<f64>()
        / nf;
    OracleFit { proj, offset, mean_squared_distortion }
}
