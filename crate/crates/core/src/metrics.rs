//! Evaluation measures: cluster purity and ARI, paired-item retrieval recall,
//! a least-squares linear probe, and Pearson correlation.

use std::collections::{BTreeMap, HashMap};

use crate::eraser::ConceptLabels;
use crate::error::{Error, Result};
use crate::linalg::{covariance, dot, pinv, Matrix};

/// Co-occurrence counts between two labelings of the same rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `rows × cols`, row-major. Rows follow the first labeling, columns the
    /// second, each in order of first appearance.
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    n: u64,
}

fn dense_codes(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let codes = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::dim(format!("labelings have {} and {} entries", a.len(), b.len())));
        }
        let (ca, rows) = dense_codes(a);
        let (cb, cols) = dense_codes(b);
        let mut counts = vec![0u64; rows * cols];
        for (&i, &j) in ca.iter().zip(&cb) {
            counts[i * cols + j] += 1;
        }
        Ok(Self { counts, rows, cols, n: a.len() as u64 })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.cols.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.cols];
        for r in self.counts.chunks(self.cols.max(1)) {
            for (s, v) in sums.iter_mut().zip(r) {
                *s += v;
            }
        }
        sums
    }

    /// True when both labelings describe the same partition.
    pub fn is_bijective(&self) -> bool {
        self.rows == self.cols
            && self.counts.chunks(self.cols.max(1)).all(|r| r.iter().filter(|&&v| v > 0).count() == 1)
    }
}

/// Fraction of rows whose cluster's most common gold class is their own.
pub fn purity(assignments: &[usize], gold: &[usize]) -> Result<f64> {
    if assignments.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let t = ContingencyTable::new(assignments, gold)?;
    let hits: u64 = t.counts.chunks(t.cols).map(|r| *r.iter().max().unwrap_or(&0)).sum();
    Ok(hits as f64 / t.n as f64)
}

fn pairs(v: u64) -> f64 {
    (v as f64) * (v.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index by pair counting.
///
/// When the chance-corrected denominator vanishes (both labelings are all one
/// cluster, or both all singletons) the result is 1 for identical partitions
/// and 0 otherwise.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: a.len() });
    }
    let t = ContingencyTable::new(a, b)?;
    let index: f64 = t.counts.iter().map(|&v| pairs(v)).sum();
    let sum_a: f64 = t.row_sums().into_iter().map(pairs).sum();
    let sum_b: f64 = t.col_sums().into_iter().map(pairs).sum();
    let expected = sum_a * sum_b / pairs(t.n);
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(if t.is_bijective() { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Similarity {
    /// Dot product of unit-normalized vectors.
    #[default]
    Cosine,
    Dot,
}

/// Ranks of each query's counterpart and the recall at each cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    /// 1-based rank of the counterpart for each query, `None` when the
    /// counterpart is not among the candidates. Queries are ordered pair by
    /// pair, `a → b` then `b → a`.
    pub ranks: Vec<Option<usize>>,
    pub recall_at: BTreeMap<usize, f64>,
}

/// Paired-item retrieval: for every pair `(a, b)`, query with `a` and find
/// the rank of `b` among the candidates (the query itself excluded), then the
/// same from `b`. Ties in similarity rank the lower index first.
///
/// `candidates = None` uses every row.
pub fn recall_at_k(
    x: &Matrix,
    pairs: &[(usize, usize)],
    candidates: Option<&[usize]>,
    ks: &[usize],
    similarity: Similarity,
) -> Result<RetrievalResult> {
    let n = x.rows();
    if pairs.is_empty() {
        return Err(Error::Validation("no pairs to evaluate".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0) {
        return Err(Error::Validation(format!("recall cutoff must be at least 1, got {k}")));
    }
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(Error::Validation(format!("pair ({a}, {b}) out of range for {n} rows")));
    }
    let pool: Vec<usize> = match candidates {
        Some(c) => {
            if let Some(&i) = c.iter().find(|&&i| i >= n) {
                return Err(Error::Validation(format!("candidate {i} out of range for {n} rows")));
            }
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => (0..n).collect(),
    };
    let vectors = match similarity {
        Similarity::Cosine => x.normalize_rows(),
        Similarity::Dot => x.clone(),
    };

    let rank_of = |query: usize, target: usize| -> Option<usize> {
        pool.binary_search(&target).ok()?;
        let q = vectors.row(query);
        let target_sim = dot(q, vectors.row(target));
        let ahead = pool
            .iter()
            .filter(|&&c| c != query && c != target)
            .filter(|&&c| {
                let s = dot(q, vectors.row(c));
                s > target_sim || (s == target_sim && c < target)
            })
            .count();
        Some(ahead + 1)
    };

    let ranks: Vec<Option<usize>> =
        pairs.iter().flat_map(|&(a, b)| [rank_of(a, b), rank_of(b, a)]).collect();
    let total = ranks.len() as f64;
    let recall_at = ks
        .iter()
        .map(|&k| {
            let hits = ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count();
            (k, hits as f64 / total)
        })
        .collect();
    Ok(RetrievalResult { ranks, recall_at })
}

/// Training accuracy of a one-vs-rest ridge least-squares probe predicting
/// `c` from `x`.
///
/// The model family includes the constant majority-class predictor: score
/// differences below `tie` are treated as ties and resolved toward the more
/// frequent class, and the reported accuracy is never below the majority
/// rate.
pub fn linear_probe_accuracy(x: &Matrix, c: &ConceptLabels, ridge: f64, tie: f64) -> Result<f64> {
    if x.rows() != c.len() {
        return Err(Error::dim(format!("{} embedding rows but {} labels", x.rows(), c.len())));
    }
    if x.rows() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: x.rows() });
    }
    c.require_concept()?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Validation(format!("ridge must be non-negative, got {ridge}")));
    }
    let y = c.one_hot();
    let cov_xx = covariance(x, x)?;
    let cov_xy = covariance(x, &y)?;
    let d = x.cols();
    let regularized = cov_xx.add(&Matrix::identity(d).scale(ridge))?;
    // (Σ_XX + λI)⁻¹ Σ_XY; the pseudoinverse covers λ = 0 on singular data
    let coef = pinv(&regularized, crate::config::DEFAULT_RTOL)?.matmul(&cov_xy)?;

    let mean_x = x.column_means();
    let prior = y.column_means();
    let counts = c.counts();
    // classes by descending frequency, then index
    let mut preference: Vec<usize> = (0..c.arity()).collect();
    preference.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let k = c.arity();
    let mut scores = vec![0.0; k];
    let mut centered = vec![0.0; d];
    let mut correct = 0usize;
    for (row, &truth) in x.row_iter().zip(c.codes()) {
        for (v, (a, m)) in centered.iter_mut().zip(row.iter().zip(&mean_x)) {
            *v = a - m;
        }
        for (j, s) in scores.iter_mut().enumerate() {
            *s = prior[j] + (0..d).map(|a| centered[a] * coef[(a, j)]).sum::<f64>();
        }
        let mut best = preference[0];
        for &j in &preference[1..] {
            if scores[j] > scores[best] + tie {
                best = j;
            }
        }
        if best == truth {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / x.rows() as f64;
    Ok(accuracy.max(c.majority_rate()))
}

/// Pearson product-moment correlation.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim(format!("vectors have lengths {} and {}", u.len(), v.len())));
    }
    if u.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: u.len() });
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite value in correlation input".into()));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(Error::DegenerateInput("correlation needs non-zero variance in both inputs".into()));
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}
