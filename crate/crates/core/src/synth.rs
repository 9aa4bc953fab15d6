//! Synthetic corpora with known structure.
//!
//! Each row is `x = B_z z + B_c c + B_u u + ε` where `z` is a one-hot topic,
//! `c` a one-hot source, `u` a standard normal latent context and `ε`
//! isotropic Gaussian noise. Rows come in events: every event fixes a topic
//! and a draw of `u`, and is rendered once per source with fresh noise. Rows
//! of the same event in different sources are the retrieval pairs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eraser::{fit, ConceptLabels};
use crate::error::{Error, Result};
use crate::linalg::{pca, Matrix};
use crate::metrics::{recall_at_k, Similarity};

/// How a loading matrix is given in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoadingSpec {
    /// Row-major `d × m` values.
    Explicit(Vec<Vec<f64>>),
    /// Random orthonormal columns scaled by the given factor.
    RandomOrthogonal { random_orthogonal: f64 },
}

/// File form of [`SyntheticSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub d: usize,
    pub n_per_cell: usize,
    pub topics: usize,
    pub sources: usize,
    /// Width of `u`; inferred from an explicit `loading_u` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_dim: Option<usize>,
    pub loading_z: LoadingSpec,
    pub loading_c: LoadingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading_u: Option<LoadingSpec>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub normalize_rows: bool,
}

impl SyntheticConfig {
    /// d = 64, 6 topics, 2 sources, 200 rows per cell (2400 rows).
    pub fn default_acceptance() -> Self {
        Self {
            d: 64,
            n_per_cell: 200,
            topics: 6,
            sources: 2,
            u_dim: Some(4),
            loading_z: LoadingSpec::RandomOrthogonal { random_orthogonal: 1.0 },
            loading_c: LoadingSpec::RandomOrthogonal { random_orthogonal: 1.0 },
            loading_u: Some(LoadingSpec::RandomOrthogonal { random_orthogonal: 0.5 }),
            noise_sigma: 0.1,
            seed: 7,
            normalize_rows: false,
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::at_byte(e.valid_up_to() as u64, "config is not valid UTF-8"))?;
        serde_json::from_str(text).map_err(|e| {
            let line_start: usize = text.split_inclusive('\n').take(e.line().saturating_sub(1)).map(str::len).sum();
            Error::at_byte((line_start + e.column().saturating_sub(1)) as u64, e.to_string())
        })
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self)
    }

    /// Materializes random loadings. Random loadings share one orthonormal
    /// basis (topics, then sources, then `u`) when their total width fits in
    /// `d`, so the three subspaces are mutually orthogonal.
    pub fn resolve(&self) -> Result<SyntheticSpec> {
        let u_dim = match (&self.loading_u, self.u_dim) {
            (Some(LoadingSpec::Explicit(rows)), declared) => {
                let width = rows.first().map_or(0, Vec::len);
                if declared.is_some_and(|u| u != width) {
                    return Err(Error::dim(format!("u_dim {declared:?} does not match loading_u width {width}")));
                }
                width
            }
            (_, declared) => declared.unwrap_or(0),
        };
        let no_u = LoadingSpec::Explicit(vec![Vec::new(); self.d]);
        let specs = [
            (&self.loading_z, self.topics, "loading_z"),
            (&self.loading_c, self.sources, "loading_c"),
            (self.loading_u.as_ref().unwrap_or(&no_u), u_dim, "loading_u"),
        ];

        let random_width: usize = specs
            .iter()
            .filter(|(s, _, _)| matches!(s, LoadingSpec::RandomOrthogonal { .. }))
            .map(|(_, w, _)| w)
            .sum();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let shared = (random_width <= self.d).then(|| random_orthonormal(self.d, random_width, &mut rng));
        let mut next_col = 0;

        let mut out = Vec::with_capacity(3);
        for (spec, width, name) in specs {
            let m = match spec {
                LoadingSpec::Explicit(rows) => {
                    if rows.len() != self.d {
                        return Err(Error::dim(format!("{name} has {} rows, expected d = {}", rows.len(), self.d)));
                    }
                    let m = if width == 0 {
                        Matrix::zeros(self.d, 0)
                    } else {
                        Matrix::from_rows(rows)?
                    };
                    if m.cols() != width {
                        return Err(Error::dim(format!("{name} has {} columns, expected {width}", m.cols())));
                    }
                    m
                }
                LoadingSpec::RandomOrthogonal { random_orthogonal: scale } => {
                    if !scale.is_finite() {
                        return Err(Error::Validation(format!("{name} scale must be finite")));
                    }
                    let basis = match &shared {
                        Some(b) => {
                            let cols: Vec<usize> = (next_col..next_col + width).collect();
                            next_col += width;
                            select_cols(b, &cols)
                        }
                        None => random_orthonormal(self.d, width, &mut rng),
                    };
                    basis.scale(*scale)
                }
            };
            out.push(m);
        }
        let loading_u = out.pop().expect("three loadings");
        let loading_c = out.pop().expect("three loadings");
        let loading_z = out.pop().expect("three loadings");
        let spec = SyntheticSpec {
            d: self.d,
            n_per_cell: self.n_per_cell,
            topics: self.topics,
            sources: self.sources,
            loading_z,
            loading_c,
            loading_u,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
            normalize_rows: self.normalize_rows,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn select_cols(m: &Matrix, cols: &[usize]) -> Matrix {
    let mut data = Vec::with_capacity(m.rows() * cols.len());
    for r in m.row_iter() {
        data.extend(cols.iter().map(|&c| r[c]));
    }
    Matrix::from_vec_unchecked(m.rows(), cols.len(), data)
}

/// `d × m` matrix with orthonormal columns (Gram–Schmidt on Gaussian draws).
/// Requires `m <= d`; when `m > d` the extra columns are unit Gaussian
/// directions that cannot be orthogonal to the rest.
fn random_orthonormal(d: usize, m: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    while cols.len() < m {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if cols.len() < d {
            for _ in 0..2 {
                for c in &cols {
                    let p = crate::linalg::dot(&v, c);
                    v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
                }
            }
        }
        let norm = crate::linalg::dot(&v, &v).sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        cols.push(v);
    }
    let mut data = vec![0.0; d * m];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            data[i * m + j] = c[i];
        }
    }
    Matrix::from_vec_unchecked(d, m, data)
}

/// Generative parameters with materialized loadings.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub d: usize,
    pub n_per_cell: usize,
    pub topics: usize,
    pub sources: usize,
    /// `d × topics`
    pub loading_z: Matrix,
    /// `d × sources`
    pub loading_c: Matrix,
    /// `d × u_dim`
    pub loading_u: Matrix,
    pub noise_sigma: f64,
    pub seed: u64,
    pub normalize_rows: bool,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_per_cell == 0 {
            return Err(Error::dim("d and n_per_cell must be positive"));
        }
        if self.topics < 2 || self.sources < 2 {
            return Err(Error::dim(format!(
                "need at least 2 topics and 2 sources, got {} and {}",
                self.topics, self.sources
            )));
        }
        let expect = |m: &Matrix, cols: usize, name: &str| -> Result<()> {
            if m.rows() != self.d || (cols != usize::MAX && m.cols() != cols) {
                return Err(Error::dim(format!("{name} is {}x{}", m.rows(), m.cols())));
            }
            Ok(())
        };
        expect(&self.loading_z, self.topics, "loading_z")?;
        expect(&self.loading_c, self.sources, "loading_c")?;
        expect(&self.loading_u, usize::MAX, "loading_u")?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Validation(format!("noise_sigma must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn u_dim(&self) -> usize {
        self.loading_u.cols()
    }

    pub fn rows(&self) -> usize {
        self.topics * self.sources * self.n_per_cell
    }

    /// Copy with the source loading multiplied by `strength`.
    pub fn with_confounder_scale(&self, strength: f64) -> Self {
        Self { loading_c: self.loading_c.scale(strength), ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub x: Matrix,
    /// Source of each row (`s0`, `s1`, ...).
    pub concept: ConceptLabels,
    /// Topic of each row (`t0`, `t1`, ...).
    pub gold: ConceptLabels,
    /// Rows of the same event in different sources.
    pub pairs: Vec<(usize, usize)>,
    /// Realized `u` for each row (`n × u_dim`).
    pub latent_u: Matrix,
}

/// Draws a corpus. Rows are ordered by topic, then event, then source.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let (d, u_dim) = (spec.d, spec.u_dim());
    let n = spec.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = Vec::with_capacity(n * d);
    let mut latent = Vec::with_capacity(n * u_dim);
    let mut topic_codes = Vec::with_capacity(n);
    let mut source_codes = Vec::with_capacity(n);
    let mut pairs = Vec::new();

    for t in 0..spec.topics {
        for _ in 0..spec.n_per_cell {
            let u: Vec<f64> = (0..u_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let first = topic_codes.len();
            for s in 0..spec.sources {
                for i in 0..d {
                    let mut v = spec.loading_z[(i, t)] + spec.loading_c[(i, s)];
                    v += (0..u_dim).map(|j| spec.loading_u[(i, j)] * u[j]).sum::<f64>();
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    x.push(v + spec.noise_sigma * eps);
                }
                latent.extend_from_slice(&u);
                topic_codes.push(t);
                source_codes.push(s);
            }
            for a in 0..spec.sources {
                for b in (a + 1)..spec.sources {
                    pairs.push((first + a, first + b));
                }
            }
        }
    }
    let mut x = Matrix::new(n, d, x)?;
    if spec.normalize_rows {
        x = x.normalize_rows();
    }
    let names = |prefix: &str, k: usize| (0..k).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let topic_names = names("t", spec.topics);
    let source_names = names("s", spec.sources);
    let gold = ConceptLabels::with_categories(
        &topic_codes.iter().map(|&t| topic_names[t].as_str()).collect::<Vec<_>>(),
        &topic_names,
    )?;
    let concept = ConceptLabels::with_categories(
        &source_codes.iter().map(|&s| source_names[s].as_str()).collect::<Vec<_>>(),
        &source_names,
    )?;
    Ok(SyntheticCorpus { x, concept, gold, pairs, latent_u: Matrix::new(n, u_dim, latent)? })
}

/// One row of a confounder-strength sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub strength: f64,
    pub seed: u64,
    /// Share of variance on the first principal component of the raw rows.
    pub pc1_ratio: f64,
    pub recall_before: f64,
    pub recall_after: f64,
}

impl SweepRow {
    pub fn improvement(&self) -> f64 {
        self.recall_after - self.recall_before
    }
}

/// For each strength, scales the source loading, generates a corpus, fits an
/// eraser on all rows and measures Recall@1 (cosine) before and after.
pub fn sweep_confounder_strength(base: &SyntheticSpec, strengths: &[f64]) -> Result<Vec<SweepRow>> {
    if strengths.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::Validation("strengths must be finite and non-negative".into()));
    }
    if strengths.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("strengths must be ascending".into()));
    }
    strengths
        .iter()
        .map(|&strength| {
            let spec = base.with_confounder_scale(strength);
            let corpus = generate(&spec)?;
            let pc1_ratio = pca(&corpus.x, 1)?.explained_variance_ratio[0];
            let before = recall_at_k(&corpus.x, &corpus.pairs, None, &[1], Similarity::Cosine)?;
            let eraser = fit(&corpus.x, &corpus.concept)?;
            let adjusted = eraser.apply(&corpus.x)?;
            let after = recall_at_k(&adjusted, &corpus.pairs, None, &[1], Similarity::Cosine)?;
            Ok(SweepRow {
                strength,
                seed: spec.seed,
                pc1_ratio,
                recall_before: before.recall_at[&1],
                recall_after: after.recall_at[&1],
            })
        })
        .collect()
}
