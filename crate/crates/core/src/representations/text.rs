use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::matrix::{CsrMatrix, FeatureMatrix, MatrixKind};
use crate::{Error, Result};

/// Minimum document frequency used when none is given.
pub const DEFAULT_MIN_DF: usize = 2;

/// Lowercase, split on runs of non-alphanumeric characters, drop tokens shorter than two chars.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// Terms kept for the bag of words, in lexicographic order, with their document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs_fitted: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn new(terms: Vec<String>, df: Vec<usize>, n_docs_fitted: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms,
            df,
            n_docs_fitted,
            index,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs_fitted(&self) -> usize {
        self.n_docs_fitted
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        if self.index.is_empty() && !self.terms.is_empty() {
            // deserialized without the index
            return self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok();
        }
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, column: usize) -> f64 {
        let n = self.n_docs_fitted as f64;
        ((1.0 + n) / (1.0 + self.df[column] as f64)).ln() + 1.0
    }
}

/// Keep tokens that occur in at least `min_df` of `texts`.
pub fn fit_vocabulary<S: AsRef<str>>(texts: &[S], min_df: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidArgument("min_df must be >= 1".into()));
    }
    if texts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        let unique: HashSet<String> = tokenize(text.as_ref()).into_iter().collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let (terms, dfs): (Vec<String>, Vec<usize>) = df.into_iter().filter(|&(_, d)| d >= min_df).unzip();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary(min_df));
    }
    Ok(Vocabulary::new(terms, dfs, texts.len()))
}

/// TF-IDF bag of words: raw counts times smoothed idf, rows scaled to unit L2 norm.
///
/// Out-of-vocabulary tokens are ignored; a document with no known tokens becomes a zero row.
pub fn tfidf<S: AsRef<str>>(texts: &[S], vocab: &Vocabulary) -> FeatureMatrix {
    let mut rows = Vec::with_capacity(texts.len());
    let mut empty = 0usize;
    for text in texts {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in tokenize(text.as_ref()) {
            if let Some(c) = vocab.column(&tok) {
                *counts.entry(c).or_insert(0.0) += 1.0;
            }
        }
        let mut row: Vec<(usize, f64)> = counts.into_iter().map(|(c, tf)| (c, tf * vocab.idf(c))).collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut row {
                *v /= norm;
            }
        } else {
            empty += 1;
        }
        rows.push(row);
    }
    if empty > 0 {
        log::warn!(
            "{empty} of {} documents have no in-vocabulary tokens (zero rows)",
            texts.len()
        );
    }
    let m = CsrMatrix::from_rows(vocab.len(), rows).expect("columns come from the vocabulary");
    FeatureMatrix::sparse(MatrixKind::Bow, m)
}
