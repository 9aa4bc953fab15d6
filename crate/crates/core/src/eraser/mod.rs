//! Least-squares affine concept erasure.
//!
//! Given embeddings `X` and categorical concept labels `C`, the fitted map
//! `x ↦ P·x + b` leaves every coordinate uncorrelated with every category
//! indicator while moving the data as little as possible in mean squared
//! distance:
//!
//! ```text
//! W = Σ_XX^{-1/2}
//! P = I − W† (W Σ_XC)(W Σ_XC)† W
//! b = μ − P μ
//! ```
//!
//! The same file also provides the first-principal-component removal
//! baseline, which has the same affine form.

mod format;
mod labels;
mod stats;

pub use labels::ConceptLabels;
pub use stats::{Moments, SufficientStats};

use crate::config::{Tolerances, DEFAULT_RTOL};
use crate::error::{Error, Result};
use crate::linalg::{covariance, pca, pinv_with_cutoff, whitening, Matrix};

/// A fitted affine eraser `x̃ = P·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaceEraser {
    pub(crate) proj: Matrix,
    pub(crate) offset: Vec<f64>,
    pub(crate) mu: Vec<f64>,
    pub(crate) arity: usize,
    pub(crate) erased_rank: usize,
    pub(crate) rtol: f64,
    pub(crate) categories: Option<Vec<String>>,
}

impl LeaceEraser {
    /// The eraser that changes nothing.
    pub fn identity(dim: usize) -> Self {
        Self {
            proj: Matrix::identity(dim),
            offset: vec![0.0; dim],
            mu: vec![0.0; dim],
            arity: 0,
            erased_rank: 0,
            rtol: DEFAULT_RTOL,
            categories: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn proj(&self) -> &Matrix {
        &self.proj
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Mean of the rows the eraser was fit on.
    pub fn fit_mean(&self) -> &[f64] {
        &self.mu
    }

    /// Number of concept categories; 0 for erasers not fit against labels.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Rank of the subspace the projection removes.
    pub fn erased_rank(&self) -> usize {
        self.erased_rank
    }

    pub fn rtol(&self) -> f64 {
        self.rtol
    }

    pub fn categories(&self) -> Option<&[String]> {
        self.categories.as_deref()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::dim(format!("eraser has dimension {}, embeddings have {}", self.dim(), x.cols())));
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(x.rows() * d);
        for row in x.row_iter() {
            for (p_row, b) in self.proj.row_iter().zip(&self.offset) {
                out.push(crate::linalg::dot(p_row, row) + b);
            }
        }
        Matrix::new(x.rows(), d, out)
    }

    /// Mean Euclidean displacement `(1/n) Σ ‖x̃_i − x_i‖`.
    pub fn distortion(&self, x: &Matrix) -> Result<f64> {
        self.displacements(x).map(|d| d.iter().map(|v| v.sqrt()).sum::<f64>() / d.len().max(1) as f64)
    }

    /// Mean squared displacement `(1/n) Σ ‖x̃_i − x_i‖²`, the quantity the
    /// closed form minimizes.
    pub fn mean_squared_distortion(&self, x: &Matrix) -> Result<f64> {
        self.displacements(x).map(|d| d.iter().sum::<f64>() / d.len().max(1) as f64)
    }

    fn displacements(&self, x: &Matrix) -> Result<Vec<f64>> {
        let adjusted = self.apply(x)?;
        Ok(x.row_iter()
            .zip(adjusted.row_iter())
            .map(|(a, b)| crate::linalg::squared_distance(a, b))
            .collect())
    }

    /// `‖P·P − P‖_F`
    pub fn idempotence_error(&self) -> f64 {
        let pp = self.proj.matmul(&self.proj).expect("P is square");
        pp.sub(&self.proj).expect("same shape").frobenius_norm()
    }

    /// `‖b − (μ − P·μ)‖_∞` against the stored fit mean.
    pub fn offset_error(&self) -> f64 {
        let pmu = self.proj.matvec(&self.mu).expect("P matches μ");
        self.offset
            .iter()
            .zip(self.mu.iter().zip(&pmu))
            .fold(0.0, |m, (b, (mu, pm))| m.max((b - (mu - pm)).abs()))
    }

    /// Re-checks the stored invariants with the given tolerances.
    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let d = self.dim();
        if self.offset_error() > tol.offset {
            return Err(Error::Numerical(format!("offset deviates from μ − Pμ by {:e}", self.offset_error())));
        }
        if self.arity >= 2 && self.erased_rank > d.min(self.arity - 1) {
            return Err(Error::Validation(format!(
                "erased rank {} exceeds min(d, k-1) = {}",
                self.erased_rank,
                d.min(self.arity - 1)
            )));
        }
        Ok(())
    }
}

fn check_fit_inputs(x: &Matrix, c: &ConceptLabels) -> Result<()> {
    if x.rows() != c.len() {
        return Err(Error::dim(format!("{} embedding rows but {} labels", x.rows(), c.len())));
    }
    if x.cols() == 0 {
        return Err(Error::dim("embeddings have no columns"));
    }
    if x.rows() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: x.rows() });
    }
    c.require_concept()
}

/// Fits the eraser on `(x, c)` with the default rank tolerance.
pub fn fit(x: &Matrix, c: &ConceptLabels) -> Result<LeaceEraser> {
    fit_with_rtol(x, c, DEFAULT_RTOL)
}

pub fn fit_with_rtol(x: &Matrix, c: &ConceptLabels, rtol: f64) -> Result<LeaceEraser> {
    check_fit_inputs(x, c)?;
    let cov_xx = covariance(x, x)?;
    let cov_xc = covariance(x, &c.one_hot())?;
    let n = c.len() as f64;
    let priors: Vec<f64> = c.counts().iter().map(|&k| k as f64 / n).collect();
    from_moments(x.column_means(), &cov_xx, &cov_xc, &priors, c.categories(), rtol)
}

/// Fits from accumulated moments; agrees with [`fit`] on the same rows up to
/// rounding.
pub fn fit_incremental(stats: &SufficientStats, rtol: f64) -> Result<LeaceEraser> {
    let k = stats.arity();
    if k < 2 {
        return Err(Error::Validation(format!("concept needs at least 2 categories, got {k}")));
    }
    if stats.dim() == 0 {
        return Err(Error::dim("statistics have no columns"));
    }
    if stats.n() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: stats.n() });
    }
    let m = stats.moments()?;
    if let Some(i) = m.category_counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyCategory(stats.categories()[i].clone()));
    }
    let n = m.n as f64;
    let priors: Vec<f64> = m.category_counts.iter().map(|&k| k as f64 / n).collect();
    from_moments(m.mean_x, &m.cov_xx, &m.cov_xc, &priors, stats.categories(), rtol)
}

fn from_moments(
    mu: Vec<f64>,
    cov_xx: &Matrix,
    cov_xc: &Matrix,
    priors: &[f64],
    categories: &[String],
    rtol: f64,
) -> Result<LeaceEraser> {
    let d = mu.len();
    let white = whitening(cov_xx, rtol)?;
    // W Σ_XC and the orthogonal projector onto its column space. The whitened
    // features have unit variance, so the singular values of W Σ_XC are
    // bounded by the concept's own spread √tr(Σ_CC) = √Σ p(1 − p). Cutting
    // relative to that, rather than to the largest singular value, keeps a
    // cross-covariance that is zero up to rounding from being "erased".
    let whitened_cross = white.forward.matmul(cov_xc)?;
    let concept_scale = priors.iter().map(|p| p * (1.0 - p)).sum::<f64>().sqrt();
    let pinv = pinv_with_cutoff(&whitened_cross, rtol * concept_scale)?;
    let range_proj = whitened_cross.matmul(&pinv.inverse)?;

    let correction = white.inverse.matmul(&range_proj)?.matmul(&white.forward)?;
    let proj = Matrix::identity(d).sub(&correction)?;
    let offset = offset_for(&proj, &mu);
    Ok(LeaceEraser {
        proj,
        offset,
        mu,
        arity: categories.len(),
        erased_rank: pinv.rank,
        rtol,
        categories: Some(categories.to_vec()),
    })
}

fn offset_for(proj: &Matrix, mu: &[f64]) -> Vec<f64> {
    let pmu = proj.matvec(mu).expect("P matches μ");
    mu.iter().zip(&pmu).map(|(m, p)| m - p).collect()
}

/// Baseline eraser that projects out the top principal direction and
/// re-centers that coordinate at the data mean.
pub fn fit_pc1_baseline(x: &Matrix) -> Result<LeaceEraser> {
    if x.rows() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: x.rows() });
    }
    if x.cols() == 0 {
        return Err(Error::dim("embeddings have no columns"));
    }
    let p = pca(x, 1)?;
    let v = p.components.row(0);
    let d = x.cols();
    let mut proj = Matrix::identity(d).into_data();
    for i in 0..d {
        for j in 0..d {
            proj[i * d + j] -= v[i] * v[j];
        }
    }
    let proj = Matrix::new(d, d, proj)?;
    let offset = offset_for(&proj, &p.mean);
    Ok(LeaceEraser {
        proj,
        offset,
        mu: p.mean,
        arity: 0,
        erased_rank: 1,
        rtol: DEFAULT_RTOL,
        categories: None,
    })
}
