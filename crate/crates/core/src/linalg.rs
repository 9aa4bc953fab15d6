//! Dense linear algebra used by the eraser: a row-major `Matrix`, symmetric
//! eigendecomposition, pseudoinverse, PSD inverse square root, covariance and
//! PCA.
//!
//! All cutoffs are relative: a singular value or eigenvalue counts as zero when
//! it is at most `rtol` times the largest one in magnitude.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Row-major matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::dim(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dim(format!("row {i} has {} columns, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Single column matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Internal constructor for values produced by arithmetic on finite inputs.
    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let cols = self.cols;
        &mut self.data[r * cols..(r + 1) * cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column_values(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.row_iter().map(<[f64]>::to_vec).collect()
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::dim(format!("row index {i} out of range for {} rows", self.rows)));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self::from_vec_unchecked(indices.len(), self.cols, data))
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        Self::from_vec_unchecked(self.cols, self.rows, out)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_vec_unchecked(self.rows, other.cols, out))
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64, op: &str) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::dim(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_vec_unchecked(self.rows, self.cols, data))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b, "add")
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b, "subtract")
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Self::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise absolute difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in max_abs_diff");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in self.row_iter() {
            for (s, v) in sums.iter_mut().zip(r) {
                *s += v;
            }
        }
        let n = self.rows.max(1) as f64;
        sums.iter_mut().for_each(|s| *s /= n);
        sums
    }

    /// Copy with every row scaled to unit Euclidean norm; zero rows stay zero.
    pub fn normalize_rows(&self) -> Matrix {
        let mut out = self.clone();
        for r in 0..out.rows {
            let row = out.row_mut(r);
            let norm = dot(row, row).sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        out
    }

    /// Relative asymmetry `‖m − mᵀ‖_F / ‖m‖_F` (0 for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut diff = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.data[i * n + j] - self.data[j * n + i];
                diff += 2.0 * d * d;
            }
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            diff.sqrt() / norm
        }
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Maximum relative asymmetry accepted by [`sym_eig`].
pub const SYMMETRY_RTOL: f64 = 1e-10;

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the same order.
    pub eigenvectors: Matrix,
}

impl SymEigResult {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column_values(i)
    }

    /// `V · diag(f(λ)) · Vᵀ`
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvectors.rows();
        let mut out = vec![0.0; n * n];
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvector(k);
            for i in 0..n {
                let vi = w * v[i];
                if vi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += vi * v[j];
                }
            }
        }
        Matrix::from_vec_unchecked(n, n, out)
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
///
/// Each eigenvector is sign-normalized so its largest-magnitude entry is
/// positive, which makes results reproducible across calls.
pub fn sym_eig(m: &Matrix) -> Result<SymEigResult> {
    if !m.is_square() {
        return Err(Error::dim(format!("sym_eig needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_RTOL {
        return Err(Error::dim(format!("matrix is not symmetric (relative asymmetry {asym:e})")));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(SymEigResult { eigenvalues: vec![], eigenvectors: Matrix::zeros(0, 0) });
    }
    let mut sym = m.to_nalgebra();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vecs = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let v = eig.eigenvectors.column(src);
        let pivot = v.iter().fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vecs[r * n + col] = sign * v[r];
        }
    }
    if eigenvalues.iter().chain(&vecs).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigendecomposition produced non-finite values".into()));
    }
    Ok(SymEigResult { eigenvalues, eigenvectors: Matrix::from_vec_unchecked(n, n, vecs) })
}

fn check_rtol(rtol: f64) -> Result<()> {
    if !(rtol.is_finite() && rtol > 0.0) {
        return Err(Error::Validation(format!("relative tolerance must be positive, got {rtol}")));
    }
    Ok(())
}

/// Moore–Penrose pseudoinverse together with the numerical rank it kept.
#[derive(Debug, Clone)]
pub struct Pseudoinverse {
    pub inverse: Matrix,
    pub rank: usize,
}

/// Moore–Penrose pseudoinverse. Singular values at or below `rtol · σ_max` are
/// treated as zero.
pub fn pinv(m: &Matrix, rtol: f64) -> Result<Matrix> {
    pinv_with_rank(m, rtol).map(|p| p.inverse)
}

/// [`pinv`], also reporting the number of singular values kept.
///
/// Symmetric inputs go through [`sym_eig`]; everything else through an SVD.
pub fn pinv_with_rank(m: &Matrix, rtol: f64) -> Result<Pseudoinverse> {
    check_rtol(rtol)?;
    pinv_impl(m, |scale| rtol * scale)
}

/// Pseudoinverse keeping only singular values strictly above an absolute
/// `cutoff`. Useful when the natural scale of `m` is known in advance, so
/// that a matrix that is zero up to rounding comes back with rank 0.
pub fn pinv_with_cutoff(m: &Matrix, cutoff: f64) -> Result<Pseudoinverse> {
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(Error::Validation(format!("cutoff must be non-negative, got {cutoff}")));
    }
    pinv_impl(m, |_| cutoff)
}

/// `cutoff_for` maps the largest singular value (or |eigenvalue|) to the
/// threshold at or below which values are dropped.
fn pinv_impl(m: &Matrix, cutoff_for: impl Fn(f64) -> f64) -> Result<Pseudoinverse> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 || m.max_abs() == 0.0 {
        return Ok(Pseudoinverse { inverse: Matrix::zeros(cols, rows), rank: 0 });
    }
    if m.is_square() && m.asymmetry() <= SYMMETRY_RTOL {
        let eig = sym_eig(m)?;
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let cutoff = cutoff_for(scale);
        let rank = eig.eigenvalues.iter().filter(|v| v.abs() > cutoff).count();
        let inverse = eig.spectral_map(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 });
        return Ok(Pseudoinverse { inverse, rank });
    }

    let svd = jacobi_svd(m)?;
    let sigma_max = svd.values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = cutoff_for(sigma_max);
    let mut inverse = vec![0.0; cols * rows];
    let mut rank = 0;
    for (k, &s) in svd.values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        rank += 1;
        // m† = Σ_k v_k u_kᵀ / σ_k
        let (u, v) = (&svd.left[k], &svd.right[k]);
        for i in 0..cols {
            let vi = v[i] / s;
            for j in 0..rows {
                inverse[i * rows + j] += vi * u[j];
            }
        }
    }
    if inverse.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("pseudoinverse produced non-finite values".into()));
    }
    Ok(Pseudoinverse { inverse: Matrix::from_vec_unchecked(cols, rows, inverse), rank })
}

/// Thin SVD as singular triplets; `left[k]` has length `rows`, `right[k]`
/// length `cols`. Left vectors of zero singular values are zero.
struct Svd {
    values: Vec<f64>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

/// One-sided (Hestenes) Jacobi SVD. Rotates column pairs until all columns
/// are mutually orthogonal; the column norms are then the singular values.
fn jacobi_svd(m: &Matrix) -> Result<Svd> {
    if m.rows < m.cols {
        let t = jacobi_svd(&m.transpose())?;
        return Ok(Svd { values: t.values, left: t.right, right: t.left });
    }
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<f64>> = (0..cols).map(|c| m.column_values(c)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|c| {
            let mut e = vec![0.0; cols];
            e[c] = 1.0;
            e
        })
        .collect();
    const TOL: f64 = 1e-15;
    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols_of in [&mut a, &mut v] {
                    let (lo, hi) = cols_of.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }
    let mut values = Vec::with_capacity(cols);
    let mut left = Vec::with_capacity(cols);
    for col in a {
        let norm = dot(&col, &col).sqrt();
        values.push(norm);
        left.push(if norm > 0.0 { col.iter().map(|x| x / norm).collect() } else { vec![0.0; rows] });
    }
    Ok(Svd { values, left, right: v })
}

/// Whitening map for a PSD covariance and its pseudoinverse, from one
/// eigendecomposition.
#[derive(Debug, Clone)]
pub struct Whitening {
    /// `Σ^{-1/2}` on the numerical range of `Σ`, zero elsewhere.
    pub forward: Matrix,
    /// `Σ^{1/2}` on the same range; the pseudoinverse of `forward`.
    pub inverse: Matrix,
    pub rank: usize,
}

/// Inverse square root and square root of a PSD matrix restricted to its
/// numerical range.
///
/// Eigenvalues in `[-rtol·λ_max, rtol·λ_max]` are treated as zero; anything
/// more negative is rejected with [`Error::NotPsd`].
pub fn whitening(m: &Matrix, rtol: f64) -> Result<Whitening> {
    check_rtol(rtol)?;
    let eig = sym_eig(m)?;
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cutoff = rtol * scale;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -cutoff {
            return Err(Error::NotPsd { eigenvalue: min, bound: -cutoff });
        }
    }
    let keep = |l: f64| l > cutoff;
    let rank = eig.eigenvalues.iter().filter(|&&l| keep(l)).count();
    let forward = eig.spectral_map(|l| if keep(l) { l.sqrt().recip() } else { 0.0 });
    let inverse = eig.spectral_map(|l| if keep(l) { l.sqrt() } else { 0.0 });
    Ok(Whitening { forward, inverse, rank })
}

/// `m^{-1/2}` for a PSD matrix, zero on the numerical null space.
pub fn inv_sqrt_psd(m: &Matrix, rtol: f64) -> Result<Matrix> {
    whitening(m, rtol).map(|w| w.forward)
}

/// Biased (1/n) cross-covariance of the columns of `x` with the columns of `y`.
pub fn covariance(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.rows != y.rows {
        return Err(Error::dim(format!("covariance inputs have {} and {} rows", x.rows, y.rows)));
    }
    let n = x.rows;
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mx = x.column_means();
    let my = y.column_means();
    let (p, q) = (x.cols, y.cols);
    let mut out = vec![0.0; p * q];
    let mut dx = vec![0.0; p];
    let mut dy = vec![0.0; q];
    for i in 0..n {
        for (d, (v, m)) in dx.iter_mut().zip(x.row(i).iter().zip(&mx)) {
            *d = v - m;
        }
        for (d, (v, m)) in dy.iter_mut().zip(y.row(i).iter().zip(&my)) {
            *d = v - m;
        }
        for a in 0..p {
            let row = &mut out[a * q..(a + 1) * q];
            for (o, b) in row.iter_mut().zip(&dy) {
                *o += dx[a] * b;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= inv_n);
    Ok(Matrix::from_vec_unchecked(p, q, out))
}

/// Principal components of a data matrix.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// `k × d`; row `i` is the i-th principal direction (unit norm).
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
    /// Share of the total variance (over all `d` directions) per component.
    pub explained_variance_ratio: Vec<f64>,
    pub mean: Vec<f64>,
}

impl PcaResult {
    /// Scores of each row of `x` on the kept components (`n × k`).
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.mean.len() {
            return Err(Error::dim(format!(
                "PCA fitted on {} columns, got {}",
                self.mean.len(),
                x.cols
            )));
        }
        let k = self.components.rows;
        let mut out = Vec::with_capacity(x.rows * k);
        let mut centered = vec![0.0; x.cols];
        for r in x.row_iter() {
            for (c, (v, m)) in centered.iter_mut().zip(r.iter().zip(&self.mean)) {
                *c = v - m;
            }
            out.extend(self.components.row_iter().map(|comp| dot(comp, &centered)));
        }
        Ok(Matrix::from_vec_unchecked(x.rows, k, out))
    }
}

pub fn pca(x: &Matrix, k: usize) -> Result<PcaResult> {
    let (n, d) = x.shape();
    let max_k = n.saturating_sub(1).min(d);
    if k == 0 || k > max_k {
        return Err(Error::dim(format!("PCA needs 1 <= k <= {max_k} for {n}x{d} data, got {k}")));
    }
    let cov = covariance(x, x)?;
    let eig = sym_eig(&cov)?;
    let clamped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("data has zero total variance".into()));
    }
    let mut components = Vec::with_capacity(k * d);
    for i in 0..k {
        components.extend(eig.eigenvector(i));
    }
    Ok(PcaResult {
        components: Matrix::from_vec_unchecked(k, d, components),
        explained_variance: clamped[..k].to_vec(),
        explained_variance_ratio: clamped[..k].iter().map(|l| l / total).collect(),
        mean: x.column_means(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && a.max_abs_diff(b) <= tol
    }

    #[test]
    fn constructor_rejects_non_finite_and_bad_length() {
        assert!(matches!(Matrix::new(2, 2, vec![1.0; 3]), Err(Error::Dimension(_))));
        assert!(matches!(Matrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::Validation(_))));
        assert!(matches!(Matrix::new(1, 1, vec![f64::INFINITY]), Err(Error::Validation(_))));
    }

    #[test]
    fn eig_identity() {
        let e = sym_eig(&Matrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
        assert!(close(&vtv, &Matrix::identity(3), 1e-14));
    }

    #[test]
    fn eig_diagonal() {
        let e = sym_eig(&Matrix::from_diag(&[1.0, 4.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![4.0, 1.0]);
        assert!(close(&e.eigenvectors, &Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap(), 1e-15));
    }

    #[test]
    fn eig_two_by_two() {
        // characteristic polynomial (2-λ)² - 1 = 0 gives λ = 3, 1
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvector(0);
        let v1 = e.eigenvector(1);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(sym_eig(&Matrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let asym = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&asym), Err(Error::Dimension(_))));
    }

    #[test]
    fn pinv_examples() {
        let i = Matrix::identity(3);
        assert!(close(&pinv(&i, 1e-10).unwrap(), &i, 1e-15));
        let z = Matrix::zeros(2, 3);
        assert_eq!(pinv(&z, 1e-10).unwrap(), Matrix::zeros(3, 2));
        let d = Matrix::from_diag(&[2.0, 0.0]);
        assert!(close(&pinv(&d, 1e-10).unwrap(), &Matrix::from_diag(&[0.5, 0.0]), 1e-15));
    }

    #[test]
    fn pinv_rectangular() {
        // column (3, 4): pseudoinverse is the row (3, 4) / 25
        let m = Matrix::column(&[3.0, 4.0]).unwrap();
        let p = pinv_with_rank(&m, 1e-10).unwrap();
        assert_eq!(p.rank, 1);
        assert!(close(&p.inverse, &Matrix::from_rows(&[[0.12, 0.16]]).unwrap(), 1e-15));
    }

    #[test]
    fn pinv_tall_rank_one() {
        // outer product u vᵀ plus round-off-sized junk in the second column
        let rows: Vec<[f64; 2]> = (0..64)
            .map(|i| {
                let u = ((i * 7 % 13) as f64 - 6.0) / 10.0;
                [0.8 * u, -0.6 * u + 1e-17 * i as f64]
            })
            .collect();
        let a = Matrix::from_rows(&rows).unwrap();
        let p = pinv_with_rank(&a, 1e-10).unwrap();
        assert_eq!(p.rank, 1);
        let g = &p.inverse;
        let aga = a.matmul(g).unwrap().matmul(&a).unwrap();
        let gag = g.matmul(&a).unwrap().matmul(g).unwrap();
        let ag = a.matmul(g).unwrap();
        let ga = g.matmul(&a).unwrap();
        assert!(aga.max_abs_diff(&a) < 1e-12);
        assert!(gag.max_abs_diff(g) < 1e-12);
        assert!(ag.asymmetry() < 1e-12);
        assert!(ga.asymmetry() < 1e-12);
    }

    #[test]
    fn pinv_rejects_bad_rtol() {
        assert!(pinv(&Matrix::identity(2), 0.0).is_err());
        assert!(pinv(&Matrix::identity(2), f64::NAN).is_err());
    }

    #[test]
    fn inv_sqrt_examples() {
        let i = Matrix::identity(2);
        assert!(close(&inv_sqrt_psd(&i, 1e-10).unwrap(), &i, 1e-15));
        let w = inv_sqrt_psd(&Matrix::from_diag(&[4.0, 9.0]), 1e-10).unwrap();
        assert!(close(&w, &Matrix::from_diag(&[0.5, 1.0 / 3.0]), 1e-15));
        let m = Matrix::from_diag(&[4.0, 0.0]);
        let w = inv_sqrt_psd(&m, 1e-10).unwrap();
        assert!(close(&w, &Matrix::from_diag(&[0.5, 0.0]), 1e-15));
        let proj = w.matmul(&m).unwrap().matmul(&w).unwrap();
        assert!(close(&proj, &Matrix::from_diag(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let m = Matrix::from_diag(&[1.0, -0.5]);
        assert!(matches!(inv_sqrt_psd(&m, 1e-10), Err(Error::NotPsd { .. })));
        // tiny negative eigenvalues are clamped
        let m = Matrix::from_diag(&[1.0, -1e-13]);
        let w = inv_sqrt_psd(&m, 1e-10).unwrap();
        assert!(close(&w, &Matrix::from_diag(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn covariance_examples() {
        let x = Matrix::column(&[1.0, -1.0]).unwrap();
        assert_eq!(covariance(&x, &x).unwrap().data(), &[1.0]);

        let same = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert_eq!(covariance(&same, &same).unwrap(), Matrix::zeros(2, 2));

        let onehot = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(covariance(&x, &onehot).unwrap().data(), &[0.5, -0.5]);
    }

    #[test]
    fn covariance_errors() {
        let x = Matrix::column(&[1.0]).unwrap();
        assert!(matches!(covariance(&x, &x), Err(Error::InsufficientData { .. })));
        let a = Matrix::column(&[1.0, 2.0]).unwrap();
        let b = Matrix::column(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(covariance(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn pca_examples() {
        let axis = Matrix::from_rows(&[[1.0, 0.0], [2.0, 0.0], [-3.0, 0.0]]).unwrap();
        let p = pca(&axis, 1).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-15);

        let corners = Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        let p = pca(&corners, 2).unwrap();
        assert!((p.explained_variance_ratio[0] - 0.5).abs() < 1e-15);
        assert!((p.explained_variance_ratio[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pca_rejects_bad_k() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(pca(&x, 0), Err(Error::Dimension(_))));
        assert!(matches!(pca(&x, 2), Err(Error::Dimension(_))));
        assert!(pca(&x, 1).is_ok());
    }

    #[test]
    fn normalize_rows_keeps_zero_rows() {
        let m = Matrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let n = m.normalize_rows();
        assert_eq!(n.row(0), &[0.6, 0.8]);
        assert_eq!(n.row(1), &[0.0, 0.0]);
    }
}
