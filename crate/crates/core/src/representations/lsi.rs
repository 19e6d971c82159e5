//! Latent semantic indexing: rank-d truncated SVD of a document-term matrix.
//!
//! The solver is Golub-Kahan-Lanczos bidiagonalization with full
//! reorthogonalization. The Krylov dimension grows until every leading Ritz
//! triplet meets the residual bound; the small bidiagonal factor is
//! diagonalized with a dense SVD. Only products with `X` and `Xᵀ` are
//! needed, so sparse BoW matrices are never densified.

use nalgebra::{DMatrix, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{DenseMatrix, FeatureMatrix, MatrixKind, Row};
use crate::{Error, Result};

/// Latent dimension used when none is given.
pub const DEFAULT_LSI_DIM: usize = 768;

/// Knobs for the iterative solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdOptions {
    /// Convergence threshold on the relative change of the leading singular values between checks.
    pub tol: f64,
    /// Convergence threshold on `‖XᵀX v − σ² v‖ / σ₁²` for each of the leading `d` vectors.
    pub residual_tol: f64,
    /// Largest Krylov dimension (Lanczos steps) before giving up.
    pub max_iter: usize,
    /// Extra Krylov dimensions beyond `d` in the first round.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: 1e-8,
            residual_tol: 1e-10,
            max_iter: 100_000,
            oversample: 10,
            seed: 0x5eed_1a51,
        }
    }
}

/// Fitted LSI map from term space to `d` latent coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LsiModel {
    d: usize,
    /// `n_terms × d`, columns are right singular vectors.
    term_basis: DenseMatrix,
    singular_values: Vec<f64>,
    iterations: usize,
}

impl LsiModel {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_terms(&self) -> usize {
        self.term_basis.n_rows()
    }

    pub fn term_basis(&self) -> &DenseMatrix {
        &self.term_basis
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Lanczos steps taken.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

pub fn lsi_fit(bow: &FeatureMatrix, d: usize) -> Result<LsiModel> {
    lsi_fit_with(bow, d, &SvdOptions::default())
}

/// Growing Lanczos bidiagonalization `X V_k = U_k B_k` with `B_k` upper bidiagonal.
struct Bidiagonalization<'a> {
    x: &'a FeatureMatrix,
    u: Vec<Vec<f64>>,
    /// Holds one vector more than `u` unless the term space is exhausted.
    v: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    floor: f64,
    rng: ChaCha8Rng,
}

impl<'a> Bidiagonalization<'a> {
    fn new(x: &'a FeatureMatrix, seed: u64) -> Self {
        let fro = (0..x.n_rows()).map(|i| x.row(i).norm().powi(2)).sum::<f64>().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v0 = random_orthogonal(&[], x.n_cols(), &mut rng);
        Bidiagonalization {
            x,
            u: Vec::new(),
            v: vec![v0],
            alpha: Vec::new(),
            beta: Vec::new(),
            floor: 1e-12 * fro,
            rng,
        }
    }

    fn steps(&self) -> usize {
        self.u.len()
    }

    fn step(&mut self) {
        let j = self.u.len();
        let (n, m) = (self.x.n_rows(), self.x.n_cols());
        let mut u = mul_x(self.x, &self.v[j]);
        if j > 0 {
            axpy(-self.beta[j - 1], &self.u[j - 1], &mut u);
        }
        reorthogonalize(&self.u, &mut u);
        let a = norm(&u);
        if a > self.floor {
            u.iter_mut().for_each(|x| *x /= a);
            self.alpha.push(a);
        } else {
            u = random_orthogonal(&self.u, n, &mut self.rng);
            self.alpha.push(0.0);
        }
        self.u.push(u);

        let mut w = mul_xt(self.x, &self.u[j]);
        axpy(-self.alpha[j], &self.v[j], &mut w);
        reorthogonalize(&self.v, &mut w);
        let b = norm(&w);
        if b > self.floor {
            w.iter_mut().for_each(|x| *x /= b);
            self.beta.push(b);
            self.v.push(w);
        } else {
            self.beta.push(0.0);
            if self.v.len() < m {
                let fresh = random_orthogonal(&self.v, m, &mut self.rng);
                self.v.push(fresh);
            }
        }
    }

    /// Singular values of `B_k`, its right singular vectors, and per-triplet residuals
    /// `‖XᵀX v − σ² v‖` of the Ritz vectors. Once the document space is spanned,
    /// `X V_{k+1} = U_k [B_k | β_k e_k]` holds exactly and that factor is used instead.
    fn ritz(&self) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
        let k = self.steps();
        let closed = k == self.x.n_rows() && self.v.len() > k;
        let width = if closed { k + 1 } else { k };
        let cols: Vec<Vec<f64>> = (0..width)
            .map(|j| {
                let mut c = vec![0.0; k];
                if j < k {
                    c[j] = self.alpha[j];
                }
                if j > 0 {
                    c[j - 1] = self.beta[j - 1];
                }
                c
            })
            .collect();
        let (sigma, q) = small_svd(&cols);
        let residuals = if closed {
            vec![0.0; width]
        } else {
            let tail = (self.beta[k - 1] * self.alpha[k - 1]).abs();
            q.iter().map(|qi| tail * qi[k - 1].abs()).collect()
        };
        (sigma, q, residuals)
    }
}

pub fn lsi_fit_with(x: &FeatureMatrix, d: usize, opts: &SvdOptions) -> Result<LsiModel> {
    let (n, m) = (x.n_rows(), x.n_cols());
    let max_rank = n.min(m);
    if d == 0 || d > max_rank {
        return Err(Error::InvalidArgument(format!(
            "LSI dimension d={d} must be in 1..={max_rank} for a {n}x{m} matrix"
        )));
    }
    let limit = max_rank.min(opts.max_iter.max(1));
    let mut target = (d + opts.oversample.max(d / 2)).min(limit);
    let mut lanczos = Bidiagonalization::new(x, opts.seed);
    let mut previous: Option<Vec<f64>> = None;

    loop {
        while lanczos.steps() < target {
            lanczos.step();
        }
        let k = lanczos.steps();
        let (sigma, q, residuals) = lanczos.ritz();
        let top = sigma[0] * sigma[0];
        let worst = if top == 0.0 {
            0.0
        } else {
            residuals.iter().take(d).fold(0.0, |acc: f64, r| acc.max(r / top))
        };
        let change = previous.as_ref().map_or(f64::INFINITY, |p| {
            (0..d.min(p.len()))
                .map(|i| {
                    let denom = sigma[i].max(1e-6 * sigma[0]);
                    if denom == 0.0 {
                        0.0
                    } else {
                        (sigma[i] - p[i]).abs() / denom
                    }
                })
                .fold(0.0, f64::max)
        });
        let settled = change < opts.tol || k >= limit;
        if k >= d && worst < opts.residual_tol && settled {
            log::debug!("LSI d={d} converged after {k} Lanczos steps");
            return Ok(assemble(d, m, &lanczos.v, &sigma, &q, k));
        }
        if k >= limit {
            return Err(Error::NoConvergence {
                iterations: k,
                max_change: change,
                max_residual: worst,
            });
        }
        target = if k >= d && worst < opts.residual_tol {
            k + 1
        } else {
            (k + k.div_ceil(2)).min(limit)
        };
        previous = Some(sigma);
    }
}

/// Basis `V_k Q[:, ..d]` with the largest-magnitude entry of each column made positive.
fn assemble(d: usize, m: usize, v: &[Vec<f64>], sigma: &[f64], q: &[Vec<f64>], k: usize) -> LsiModel {
    let cols: Vec<Vec<f64>> = q[..d]
        .par_iter()
        .map(|coeffs| {
            let mut out = vec![0.0; m];
            for (c, col) in coeffs.iter().zip(v) {
                if *c != 0.0 {
                    axpy(*c, col, &mut out);
                }
            }
            out
        })
        .collect();
    let mut basis = DenseMatrix::zeros(m, d);
    for (j, col) in cols.iter().enumerate() {
        let mut pivot = 0;
        for (r, val) in col.iter().enumerate() {
            if val.abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (r, val) in col.iter().enumerate() {
            basis.row_mut(r)[j] = sign * val;
        }
    }
    LsiModel {
        d,
        term_basis: basis,
        singular_values: sigma[..d].to_vec(),
        iterations: k,
    }
}

/// Latent coordinates `x · V_d` for every row of `rows`.
pub fn lsi_project(model: &LsiModel, rows: &FeatureMatrix) -> Result<FeatureMatrix> {
    if rows.n_cols() != model.n_terms() {
        return Err(Error::DimensionMismatch {
            expected: model.n_terms(),
            got: rows.n_cols(),
        });
    }
    let d = model.d;
    let basis = &model.term_basis;
    let data: Vec<f64> = (0..rows.n_rows())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = vec![0.0; d];
            match rows.row(i) {
                Row::Sparse(idx, vals) => {
                    for (&c, &v) in idx.iter().zip(vals) {
                        for (o, b) in out.iter_mut().zip(basis.row(c)) {
                            *o += v * b;
                        }
                    }
                }
                Row::Dense(vals) => {
                    for (c, &v) in vals.iter().enumerate() {
                        if v != 0.0 {
                            for (o, b) in out.iter_mut().zip(basis.row(c)) {
                                *o += v * b;
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let dense = DenseMatrix::new(rows.n_rows(), d, data)?;
    FeatureMatrix::dense(MatrixKind::Lsi, dense).with_ids(rows.ids().to_vec())
}

/// `X · v`.
fn mul_x(x: &FeatureMatrix, v: &[f64]) -> Vec<f64> {
    let dense = Row::Dense(v);
    (0..x.n_rows()).into_par_iter().map(|i| x.row(i).dot(&dense)).collect()
}

/// `Xᵀ · u`.
fn mul_xt(x: &FeatureMatrix, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.n_cols()];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        match x.row(i) {
            Row::Sparse(idx, vals) => {
                for (&c, &v) in idx.iter().zip(vals) {
                    out[c] += v * ui;
                }
            }
            Row::Dense(vals) => {
                for (o, &v) in out.iter_mut().zip(vals) {
                    *o += v * ui;
                }
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram-Schmidt against an orthonormal `basis`.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let h: Vec<f64> = basis.par_iter().map(|b| dot(b, w)).collect();
        w.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let off = c * 4096;
            for (b, &hb) in basis.iter().zip(&h) {
                for (wi, bi) in chunk.iter_mut().zip(&b[off..]) {
                    *wi -= hb * bi;
                }
            }
        });
    }
}

/// A random unit vector of length `dim` orthogonal to `basis`.
fn random_orthogonal(basis: &[Vec<f64>], dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..100 {
        let mut w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let before = norm(&w);
        reorthogonalize(basis, &mut w);
        let after = norm(&w);
        if after > 1e-6 * before {
            w.iter_mut().for_each(|x| *x /= after);
            return w;
        }
    }
    panic!(
        "cannot extend an orthonormal basis of {} vectors in dimension {dim}",
        basis.len()
    );
}

/// SVD of a small dense matrix given by columns of equal length.
/// Returns singular values in non-increasing order and the matching right singular vectors.
fn small_svd(cols: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rows = cols.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]);
    let svd = SVD::new_unordered(a, false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    (
        order.iter().map(|&i| sigma[i]).collect(),
        order.iter().map(|&i| v_t.row(i).iter().copied().collect()).collect(),
    )
}
