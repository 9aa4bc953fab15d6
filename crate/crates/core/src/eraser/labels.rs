use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-row categorical labels with an ordered category list.
///
/// Used both for the concept being erased (source, language) and for gold
/// topic labels in evaluation. Fitting requires at least two categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptLabels {
    codes: Vec<usize>,
    categories: Vec<String>,
}

impl ConceptLabels {
    /// Categories are taken in order of first appearance.
    pub fn from_strings<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut categories = Vec::new();
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *index.entry(l).or_insert_with(|| {
                    categories.push(l.to_owned());
                    categories.len() - 1
                })
            })
            .collect();
        Self { codes, categories }
    }

    /// Labels against a declared category list, which may contain categories
    /// that no row uses.
    pub fn with_categories<S: AsRef<str>, T: AsRef<str>>(labels: &[S], categories: &[T]) -> Result<Self> {
        let categories: Vec<String> = categories.iter().map(|c| c.as_ref().to_owned()).collect();
        let mut index = HashMap::new();
        for (i, c) in categories.iter().enumerate() {
            if index.insert(c.as_str(), i).is_some() {
                return Err(Error::Validation(format!("duplicate category {c:?}")));
            }
        }
        let codes = labels
            .iter()
            .enumerate()
            .map(|(row, l)| {
                index.get(l.as_ref()).copied().ok_or_else(|| {
                    Error::Validation(format!("row {row}: label {:?} is not a declared category", l.as_ref()))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { codes, categories })
    }

    /// Integer codes in `0..arity`; category names are the decimal codes.
    pub fn from_codes(codes: Vec<usize>, arity: usize) -> Result<Self> {
        if let Some((row, &c)) = codes.iter().enumerate().find(|(_, &c)| c >= arity) {
            return Err(Error::Validation(format!("row {row}: code {c} not below arity {arity}")));
        }
        Ok(Self { codes, categories: (0..arity).map(|c| c.to_string()).collect() })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.categories.len()
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn label(&self, row: usize) -> &str {
        &self.categories[self.codes[row]]
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.arity()];
        for &c in &self.codes {
            counts[c] += 1;
        }
        counts
    }

    /// Accuracy of always predicting the most frequent category.
    pub fn majority_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        *self.counts().iter().max().unwrap_or(&0) as f64 / self.len() as f64
    }

    /// `n × k` indicator matrix; each row sums to 1.
    pub fn one_hot(&self) -> Matrix {
        let k = self.arity();
        let mut data = vec![0.0; self.len() * k];
        for (row, &c) in self.codes.iter().enumerate() {
            data[row * k + c] = 1.0;
        }
        Matrix::from_vec_unchecked(self.len(), k, data)
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let codes = rows
            .iter()
            .map(|&r| {
                self.codes
                    .get(r)
                    .copied()
                    .ok_or_else(|| Error::dim(format!("row {r} out of range for {} labels", self.len())))
            })
            .collect::<Result<_>>()?;
        Ok(Self { codes, categories: self.categories.clone() })
    }

    /// Checks the invariants fitting relies on: at least two categories and no
    /// empty category.
    pub(crate) fn require_concept(&self) -> Result<()> {
        if self.arity() < 2 {
            return Err(Error::Validation(format!(
                "concept needs at least 2 categories, got {}",
                self.arity()
            )));
        }
        if let Some(i) = self.counts().iter().position(|&c| c == 0) {
            return Err(Error::EmptyCategory(self.categories[i].clone()));
        }
        Ok(())
    }
}
