//! Cold-start instance selection: exact cosine kNN, density, diversity and the
//! greedy density-weighted diversity selector.
//!
//! All functions take a similarity view (unit-norm rows, see
//! [`similarity_view`](crate::representations::similarity_view)) so that a dot
//! product is a cosine. Nothing here ever sees a label.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::representations::{FeatureMatrix, MatrixKind, Row};
use crate::{Error, Result};

/// Neighborhood size used when none is given.
pub const DEFAULT_K: usize = 10;

/// Diversity threshold that worked best for each representation kind.
pub fn default_dist_min(kind: MatrixKind) -> f64 {
    match kind {
        MatrixKind::Bow | MatrixKind::Lsi => 0.7,
        MatrixKind::Embedding => 0.01,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Maximum number of instances to label.
    pub budget: usize,
    /// Neighbors averaged into the density.
    pub k: usize,
    /// Minimum cosine distance to every already selected instance.
    pub dist_min: f64,
}

impl SelectionConfig {
    pub fn new(budget: usize, k: usize, dist_min: f64) -> Result<Self> {
        let cfg = SelectionConfig { budget, k, dist_min };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidArgument("budget must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.dist_min) {
            return Err(Error::InvalidArgument(format!(
                "dist_min must be in [0, 1], got {}",
                self.dist_min
            )));
        }
        Ok(())
    }
}

/// One scanned candidate: its density and the diversity it had when it was considered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub id: usize,
    pub density: f64,
    pub diversity: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected document ids in selection order.
    pub selected: Vec<usize>,
    pub exhausted: bool,
    pub audit: Vec<AuditRecord>,
    /// Density of every pool row, indexed by row position.
    #[serde(skip)]
    pub densities: Vec<f64>,
}

/// Orders by similarity descending, then row index ascending.
fn by_similarity(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    descending(a.1, b.1).then(a.0.cmp(&b.0))
}

/// `-0.0` and `0.0` compare equal here, unlike `total_cmp`.
fn descending(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

fn top_k(mut sims: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    if sims.len() > k {
        sims.select_nth_unstable_by(k - 1, by_similarity);
        sims.truncate(k);
    }
    sims.sort_unstable_by(by_similarity);
    sims
}

fn check_view(view: &FeatureMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if view.n_rows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "kNN needs at least 2 rows, got {}",
            view.n_rows()
        )));
    }
    Ok(())
}

/// The `k` rows most similar to row `i` (excluding `i`), with their similarities.
/// Ties go to the lower row index; fewer than `k` rows are returned if the view is small.
pub fn knn_topk(view: &FeatureMatrix, i: usize, k: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    check_view(view, k)?;
    if i >= view.n_rows() {
        return Err(Error::OutOfRange {
            index: i,
            len: view.n_rows(),
        });
    }
    let query = view.row(i);
    let sims = (0..view.n_rows())
        .filter(|&j| j != i)
        .map(|j| (j, query.dot(&view.row(j))))
        .collect();
    Ok(top_k(sims, k).into_iter().unzip())
}

/// Inverted index over a sparse view; scores accumulate in ascending column
/// order so they match [`Row::dot`] bit for bit.
struct Postings {
    lists: Vec<Vec<(usize, f64)>>,
}

impl Postings {
    fn build(view: &FeatureMatrix) -> Self {
        let mut lists = vec![Vec::new(); view.n_cols()];
        for j in 0..view.n_rows() {
            if let Row::Sparse(idx, vals) = view.row(j) {
                for (&c, &v) in idx.iter().zip(vals) {
                    lists[c].push((j, v));
                }
            }
        }
        Postings { lists }
    }

    fn scores(&self, view: &FeatureMatrix, i: usize) -> Vec<(usize, f64)> {
        let n = view.n_rows();
        let mut acc = vec![0.0f64; n];
        if let Row::Sparse(idx, vals) = view.row(i) {
            for (&c, &v) in idx.iter().zip(vals) {
                for &(j, w) in &self.lists[c] {
                    acc[j] += v * w;
                }
            }
        }
        acc.into_iter().enumerate().filter(|&(j, _)| j != i).collect()
    }
}

/// Mean similarity of each row to its `k` nearest neighbors in the whole view.
pub fn density_all(view: &FeatureMatrix, k: usize) -> Result<Vec<f64>> {
    check_view(view, k)?;
    let n = view.n_rows();
    let postings = view.is_sparse().then(|| Postings::build(view));
    let densities = (0..n)
        .into_par_iter()
        .map(|i| {
            let sims = match &postings {
                Some(p) => p.scores(view, i),
                None => {
                    let q = view.row(i);
                    (0..n).filter(|&j| j != i).map(|j| (j, q.dot(&view.row(j)))).collect()
                }
            };
            let top = top_k(sims, k);
            let sum = top.iter().fold(0.0, |acc, &(_, s)| acc + s);
            sum / top.len() as f64
        })
        .collect();
    Ok(densities)
}

/// `1 - max_{s in selected} cos(x, s)`, clamped to `[0, 2]`. An empty selection gives 1.
/// `selected` holds row positions in `view`.
pub fn diversity(view: &FeatureMatrix, x: usize, selected: &[usize]) -> f64 {
    let q = view.row(x);
    let max_sim = selected
        .iter()
        .map(|&s| q.dot(&view.row(s)))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_sim == f64::NEG_INFINITY {
        1.0
    } else {
        (1.0 - max_sim).clamp(0.0, 2.0)
    }
}

/// Greedy density-weighted diversity selection.
///
/// Candidates are visited once each in non-increasing density order (ties by
/// row index) and accepted when their diversity against everything accepted so
/// far reaches `dist_min`, until `budget` instances are chosen or the pool is
/// used up. Densities are computed once over the full pool.
pub fn dwds_select(view: &FeatureMatrix, cfg: &SelectionConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    let n = view.n_rows();
    if n == 0 {
        return Err(Error::InvalidArgument("selection pool is empty".into()));
    }
    let densities = if n == 1 { vec![0.0] } else { density_all(view, cfg.k)? };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| descending(densities[a], densities[b]).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = Vec::with_capacity(cfg.budget.min(n));
    let mut audit = Vec::new();
    for &cand in &order {
        if chosen.len() >= cfg.budget {
            break;
        }
        let div = diversity(view, cand, &chosen);
        let accepted = div >= cfg.dist_min;
        audit.push(AuditRecord {
            id: view.ids()[cand],
            density: densities[cand],
            diversity: div,
            accepted,
        });
        if accepted {
            chosen.push(cand);
        }
    }
    Ok(SelectionResult {
        exhausted: chosen.len() < cfg.budget,
        selected: chosen.iter().map(|&p| view.ids()[p]).collect(),
        audit,
        densities,
    })
}
