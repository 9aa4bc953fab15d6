use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::labels::ConceptLabels;

/// Raw first and second moments of `(x, one_hot(c))`, accumulated in chunks.
///
/// Two accumulators over disjoint row sets merge into the accumulator of
/// their union, so an eraser can be fit without holding all rows at once.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    n: usize,
    sum_x: Vec<f64>,
    sum_c: Vec<f64>,
    /// `d × k`, row-major: Σ x cᵀ.
    cross_xc: Vec<f64>,
    /// `d × d`, row-major: Σ x xᵀ.
    gram_xx: Vec<f64>,
    categories: Vec<String>,
}

/// Mean and covariances recovered from accumulated moments.
#[derive(Debug, Clone)]
pub struct Moments {
    pub n: usize,
    pub mean_x: Vec<f64>,
    pub cov_xx: Matrix,
    pub cov_xc: Matrix,
    pub category_counts: Vec<usize>,
}

impl SufficientStats {
    pub fn new<S: AsRef<str>>(dim: usize, categories: &[S]) -> Self {
        let k = categories.len();
        Self {
            n: 0,
            sum_x: vec![0.0; dim],
            sum_c: vec![0.0; k],
            cross_xc: vec![0.0; dim * k],
            gram_xx: vec![0.0; dim * dim],
            categories: categories.iter().map(|c| c.as_ref().to_owned()).collect(),
        }
    }

    pub fn from_batch(x: &Matrix, c: &ConceptLabels) -> Result<Self> {
        let mut s = Self::new(x.cols(), c.categories());
        s.update(x, c)?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.sum_x.len()
    }

    pub fn arity(&self) -> usize {
        self.sum_c.len()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn update(&mut self, x: &Matrix, c: &ConceptLabels) -> Result<()> {
        if x.rows() != c.len() {
            return Err(Error::dim(format!("{} embedding rows but {} labels", x.rows(), c.len())));
        }
        if x.cols() != self.dim() {
            return Err(Error::dim(format!("stats have dimension {}, batch has {}", self.dim(), x.cols())));
        }
        if c.categories() != self.categories.as_slice() {
            return Err(Error::Validation("batch categories differ from accumulator categories".into()));
        }
        let (d, k) = (self.dim(), self.arity());
        for (row, &code) in x.row_iter().zip(c.codes()) {
            self.sum_c[code] += 1.0;
            for a in 0..d {
                let xa = row[a];
                self.sum_x[a] += xa;
                self.cross_xc[a * k + code] += xa;
                let g = &mut self.gram_xx[a * d..(a + 1) * d];
                for (gv, &xb) in g.iter_mut().zip(row) {
                    *gv += xa * xb;
                }
            }
        }
        self.n += x.rows();
        Ok(())
    }

    pub fn merge(&mut self, other: &SufficientStats) -> Result<()> {
        if self.dim() != other.dim() || self.categories != other.categories {
            return Err(Error::dim("cannot merge statistics with different dimension or categories"));
        }
        self.n += other.n;
        for (a, b) in self.sum_x.iter_mut().zip(&other.sum_x) {
            *a += b;
        }
        for (a, b) in self.sum_c.iter_mut().zip(&other.sum_c) {
            *a += b;
        }
        for (a, b) in self.cross_xc.iter_mut().zip(&other.cross_xc) {
            *a += b;
        }
        for (a, b) in self.gram_xx.iter_mut().zip(&other.gram_xx) {
            *a += b;
        }
        Ok(())
    }

    pub fn merged(mut self, other: &SufficientStats) -> Result<Self> {
        self.merge(other)?;
        Ok(self)
    }

    /// Biased (1/n) covariances, matching [`crate::linalg::covariance`].
    pub fn moments(&self) -> Result<Moments> {
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n });
        }
        let (d, k) = (self.dim(), self.arity());
        let n = self.n as f64;
        let mean_x: Vec<f64> = self.sum_x.iter().map(|s| s / n).collect();
        let mean_c: Vec<f64> = self.sum_c.iter().map(|s| s / n).collect();

        let mut cov_xx = vec![0.0; d * d];
        for a in 0..d {
            for b in a..d {
                let v = self.gram_xx[a * d + b] / n - mean_x[a] * mean_x[b];
                cov_xx[a * d + b] = v;
                cov_xx[b * d + a] = v;
            }
        }
        let mut cov_xc = vec![0.0; d * k];
        for a in 0..d {
            for j in 0..k {
                cov_xc[a * k + j] = self.cross_xc[a * k + j] / n - mean_x[a] * mean_c[j];
            }
        }
        Ok(Moments {
            n: self.n,
            mean_x,
            cov_xx: Matrix::new(d, d, cov_xx)?,
            cov_xc: Matrix::new(d, k, cov_xc)?,
            category_counts: self.sum_c.iter().map(|&s| s as usize).collect(),
        })
    }
}
