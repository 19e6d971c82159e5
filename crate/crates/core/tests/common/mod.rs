//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use alcs::representations::{CsrMatrix, DenseMatrix, FeatureMatrix, MatrixKind};
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn dense(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::dense(MatrixKind::Embedding, DenseMatrix::from_rows(rows).unwrap())
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ua: Vec<f64> = a.iter().map(|x| x / na).collect();
    let ub: Vec<f64> = b.iter().map(|x| x / nb).collect();
    ua.iter().zip(&ub).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// All pairwise cosines.
pub fn cosine_table(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| rows.iter().map(|b| cosine(a, b)).collect())
        .collect()
}

/// Mean of the `k` largest similarities to other rows, sorting every pair.
pub fn brute_density(sim: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..sim.len())
        .map(|i| {
            let mut others: Vec<(usize, f64)> = (0..sim.len()).filter(|&j| j != i).map(|j| (j, sim[i][j])).collect();
            others.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let top = &others[..k.min(others.len())];
            top.iter().fold(0.0, |acc, (_, s)| acc + s) / top.len() as f64
        })
        .collect()
}

/// Neighbors of `i` by a full sort, ties to the lower index.
pub fn brute_knn(sim: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..sim.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| sim[i][b].partial_cmp(&sim[i][a]).unwrap().then(a.cmp(&b)));
    others.truncate(k);
    others
}

/// The selection loop exactly as written: take the densest remaining instance,
/// accept it if far enough from everything accepted, drop it from the pool, repeat.
/// Diversity is kept in its range `[0, 2]`, so a duplicate scores 0 rather than -1 ulp.
pub fn literal_dwds(rows: &[Vec<f64>], k: usize, budget: usize, dist_min: f64) -> (Vec<usize>, bool) {
    let sim = cosine_table(rows);
    let density = brute_density(&sim, k);
    let mut selected: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..rows.len()).collect();
    while selected.len() < budget && !remaining.is_empty() {
        let mut best = 0;
        for pos in 1..remaining.len() {
            if density[remaining[pos]] > density[remaining[best]] {
                best = pos;
            }
        }
        let s = remaining[best];
        let div = if selected.is_empty() {
            1.0
        } else {
            (1.0 - selected.iter().map(|&t| sim[s][t]).fold(f64::NEG_INFINITY, f64::max)).clamp(0.0, 2.0)
        };
        if div >= dist_min {
            selected.push(s);
        }
        remaining.remove(best);
    }
    let exhausted = selected.len() < budget;
    (selected, exhausted)
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dims).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// Four tight clusters around orthogonal axes of a 10-D space, with cluster ids.
pub fn four_clusters(rng: &mut ChaCha8Rng, per_cluster: usize, noise: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..4 {
        for _ in 0..per_cluster {
            let mut v: Vec<f64> = (0..10).map(|_| noise * rng.sample::<f64, _>(StandardNormal)).collect();
            v[c] += 1.0;
            rows.push(v);
            labels.push(c);
        }
    }
    (rows, labels)
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

/// Singular values and right singular vectors (as columns `v[j]`) from a dense SVD,
/// signs fixed so each vector's largest-magnitude entry is positive.
pub fn dense_svd(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let svd = to_dmatrix(rows).svd(false, true);
    let v_t = svd.v_t.unwrap();
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = v_t.row(i).iter().copied().collect();
            let pivot = col.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m });
            if pivot < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    (order.iter().map(|&i| sv[i]).collect(), vectors)
}

/// Random sparse matrix with roughly `density` nonzeros, uniform in (0, 1].
pub fn random_sparse(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    if rng.gen::<f64>() < density {
                        1.0 - rng.gen::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Two-sided Wilcoxon signed-rank p-value by listing every sign assignment.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> f64 {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|&x| {
            let below = abs.iter().filter(|&&y| y < x).count() as f64;
            let equal = abs.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let w = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= w + 1e-9 {
            hits += 1;
        }
    }
    (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
}

pub fn sparse(rows: &[Vec<f64>]) -> FeatureMatrix {
    let entries = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(c, v)| (c, *v))
                .collect()
        })
        .collect();
    FeatureMatrix::sparse(MatrixKind::Bow, CsrMatrix::from_rows(rows[0].len(), entries).unwrap())
}

/// `x · V` for a list of basis columns.
pub fn project_rows(rows: &[Vec<f64>], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            basis
                .iter()
                .map(|v| r.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

/// Frobenius norm of `X − X V Vᵀ`.
pub fn reconstruction_error(rows: &[Vec<f64>], basis: &[Vec<f64>]) -> f64 {
    let coords = project_rows(rows, basis);
    let mut err = 0.0;
    for (r, c) in rows.iter().zip(&coords) {
        for (j, &x) in r.iter().enumerate() {
            let approx: f64 = basis.iter().zip(c).map(|(v, w)| v[j] * w).sum();
            err += (x - approx).powi(2);
        }
    }
    err.sqrt()
}

/// Columns of a row-major `n_terms × d` basis.
pub fn basis_columns(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.n_cols())
        .map(|j| (0..m.n_rows()).map(|i| m.get(i, j)).collect())
        .collect()
}
