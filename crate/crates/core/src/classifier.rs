//! One-vs-rest linear max-margin classifier.
//!
//! Each binary problem minimizes `½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))` with an
//! unregularized bias. The dual is solved by SMO with second-order working set
//! selection over the linear kernel. After every epoch the primal iterate
//! `w = Σ αᵢ yᵢ xᵢ` gets the exactly optimal bias for that `w`, and the solver
//! keeps it only if it lowers the primal objective, so the recorded objective
//! never goes up.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::representations::{FeatureMatrix, Row};
use crate::{Error, Result};

/// Regularization trade-off used when none is given.
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_EPOCHS: usize = 50;

/// Training rows up to which the full Gram matrix is precomputed and shared across classes.
const FULL_GRAM_MAX_ROWS: usize = 6000;
const KKT_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;
const MIN_REL_IMPROVEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: f64,
    pub epochs: usize,
    /// Reserved for solvers that shuffle; SMO's working-set choice is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: DEFAULT_C,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
        }
    }
}

/// Per-class solver trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTrace {
    pub epochs_run: usize,
    /// Primal objective of the retained iterate: entry 0 is the zero model, then one per epoch.
    pub objectives: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    classes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    c: f64,
    trace: Vec<ClassTrace>,
}

impl LinearModel {
    /// Build a model from explicit parameters (no training trace).
    pub fn from_parts(classes: Vec<usize>, weights: Vec<Vec<f64>>, biases: Vec<f64>, c: f64) -> Result<Self> {
        if classes.is_empty() || weights.len() != classes.len() || biases.len() != classes.len() {
            return Err(Error::InvalidArgument(
                "classes, weights and biases must be non-empty and of equal length".into(),
            ));
        }
        let dims = weights[0].len();
        if let Some(w) = weights.iter().find(|w| w.len() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                got: w.len(),
            });
        }
        Ok(LinearModel {
            trace: vec![
                ClassTrace {
                    epochs_run: 0,
                    objectives: Vec::new(),
                    converged: true,
                };
                classes.len()
            ],
            classes,
            weights,
            biases,
            c,
        })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n_dims(&self) -> usize {
        self.weights[0].len()
    }

    pub fn trace(&self) -> &[ClassTrace] {
        &self.trace
    }
}

enum Gram<'a> {
    Full { n: usize, k: Vec<f64> },
    OnDemand(&'a FeatureMatrix),
}

impl Gram<'_> {
    fn diag(&self, x_n: usize) -> Vec<f64> {
        match self {
            Gram::Full { n, k } => (0..*n).map(|i| k[i * n + i]).collect(),
            Gram::OnDemand(x) => (0..x_n).map(|i| x.dot(i, i)).collect(),
        }
    }
}

/// Kernel rows for one binary solve, cached when the Gram matrix is not precomputed.
struct KernelRows<'g, 'a> {
    gram: &'g Gram<'a>,
    cache: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'g, 'a> KernelRows<'g, 'a> {
    fn new(gram: &'g Gram<'a>, n: usize) -> Self {
        let capacity = ((256usize << 20) / (8 * n.max(1))).max(2);
        KernelRows {
            gram,
            cache: vec![None; n],
            order: VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        match self.gram {
            Gram::Full { n, k } => &k[i * n..(i + 1) * n],
            Gram::OnDemand(x) => {
                if self.cache[i].is_none() {
                    if self.order.len() >= self.capacity {
                        let old = self.order.pop_front().unwrap();
                        self.cache[old] = None;
                    }
                    let qi = x.row(i);
                    self.cache[i] = Some((0..x.n_rows()).map(|j| qi.dot(&x.row(j))).collect());
                    self.order.push_back(i);
                }
                self.cache[i].as_deref().unwrap()
            }
        }
    }

    /// Row `i` and row `j` at once (copies when not precomputed).
    fn pair(&mut self, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        let ri = self.row(i).to_vec();
        let rj = self.row(j).to_vec();
        (ri, rj)
    }
}

/// Hinge loss sum for scores `s` (without bias) at bias `b`.
fn hinge_sum(s: &[f64], y: &[f64], b: f64) -> f64 {
    s.iter().zip(y).map(|(si, yi)| (1.0 - yi * (si + b)).max(0.0)).sum()
}

/// Bias minimizing `Σ max(0, 1 − yᵢ(sᵢ + b))`. The loss is convex piecewise linear
/// with kinks at `yᵢ − sᵢ`; flat minima resolve to their midpoint.
fn optimal_bias(s: &[f64], y: &[f64]) -> f64 {
    let mut kinks: Vec<(f64, bool)> = s.iter().zip(y).map(|(si, yi)| (yi - si, *yi > 0.0)).collect();
    kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
    // slope just right of b: −#{pos with kink > b} + #{neg with kink ≤ b}
    let mut pos_above = kinks.iter().filter(|k| k.1).count() as i64;
    let mut neg_below = 0i64;
    let mut idx = 0;
    while idx < kinks.len() {
        let t = kinks[idx].0;
        while idx < kinks.len() && kinks[idx].0 == t {
            if kinks[idx].1 {
                pos_above -= 1;
            } else {
                neg_below += 1;
            }
            idx += 1;
        }
        let slope = neg_below - pos_above;
        if slope > 0 {
            return t;
        }
        if slope == 0 {
            return match kinks.get(idx) {
                Some(next) => 0.5 * (t + next.0),
                None => t,
            };
        }
    }
    kinks.last().map_or(0.0, |k| k.0)
}

struct BinaryFit {
    alpha: Vec<f64>,
    bias: f64,
    trace: ClassTrace,
}

/// Scores `w·xᵢ` and `‖w‖²` for `w = Σ αⱼ yⱼ xⱼ`, from the dual gradient `G = Qα − 1`.
fn primal_parts(alpha: &[f64], grad: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let scores: Vec<f64> = grad.iter().zip(y).map(|(g, yi)| yi * (g + 1.0)).collect();
    let w_sq = alpha
        .iter()
        .zip(&scores)
        .zip(y)
        .map(|((a, s), yi)| a * yi * s)
        .sum::<f64>();
    (scores, w_sq.max(0.0))
}

fn solve_binary(gram: &Gram<'_>, diag: &[f64], y: &[f64], c: f64, epochs: usize) -> BinaryFit {
    let n = y.len();
    let mut rows = KernelRows::new(gram, n);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];

    let zero_scores = vec![0.0; n];
    let b0 = optimal_bias(&zero_scores, y);
    let mut best_alpha = alpha.clone();
    let mut best_bias = b0;
    let mut best_obj = c * hinge_sum(&zero_scores, y, b0);
    let mut objectives = vec![best_obj];
    let mut converged = false;
    let mut epochs_run = 0;

    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    while epochs_run < epochs && !converged {
        epochs_run += 1;
        for _ in 0..n.max(1) {
            // i: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..n {
                let v = if y[t] > 0.0 {
                    (!is_upper(alpha[t])).then(|| -grad[t])
                } else {
                    (!is_lower(alpha[t])).then(|| grad[t])
                };
                if let Some(v) = v {
                    if v >= gmax {
                        gmax = v;
                        i_sel = Some(t);
                    }
                }
            }
            let Some(i) = i_sel else {
                converged = true;
                break;
            };
            let qi = rows.row(i).to_vec();
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut obj_diff_min = f64::INFINITY;
            for t in 0..n {
                let q_it = y[i] * y[t] * qi[t];
                if y[t] > 0.0 {
                    if !is_lower(alpha[t]) {
                        let grad_diff = gmax + grad[t];
                        if grad[t] >= gmax2 {
                            gmax2 = grad[t];
                        }
                        if grad_diff > 0.0 {
                            let quad = diag[i] + diag[t] - 2.0 * y[i] * q_it;
                            let od = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                            if od <= obj_diff_min {
                                obj_diff_min = od;
                                j_sel = Some(t);
                            }
                        }
                    }
                } else if !is_upper(alpha[t]) {
                    let grad_diff = gmax - grad[t];
                    if -grad[t] >= gmax2 {
                        gmax2 = -grad[t];
                    }
                    if grad_diff > 0.0 {
                        let quad = diag[i] + diag[t] + 2.0 * y[i] * q_it;
                        let od = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                        if od <= obj_diff_min {
                            obj_diff_min = od;
                            j_sel = Some(t);
                        }
                    }
                }
            }
            let j = match j_sel {
                Some(j) if gmax + gmax2 >= KKT_TOL => j,
                _ => {
                    converged = true;
                    break;
                }
            };

            let (ki, kj) = rows.pair(i, j);
            let q_ij = y[i] * y[j] * ki[j];
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if y[i] != y[j] {
                let quad = (diag[i] + diag[j] + 2.0 * q_ij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (diag[i] + diag[j] - 2.0 * q_ij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
            }
        }

        let (scores, w_sq) = primal_parts(&alpha, &grad, y);
        let bias = optimal_bias(&scores, y);
        let obj = 0.5 * w_sq + c * hinge_sum(&scores, y, bias);
        if obj < best_obj {
            let improvement = (best_obj - obj) / best_obj.abs().max(f64::MIN_POSITIVE);
            best_obj = obj;
            best_alpha.clone_from(&alpha);
            best_bias = bias;
            if improvement < MIN_REL_IMPROVEMENT {
                converged = true;
            }
        }
        objectives.push(best_obj);
    }

    BinaryFit {
        alpha: best_alpha,
        bias: best_bias,
        trace: ClassTrace {
            epochs_run,
            objectives,
            converged,
        },
    }
}

/// Train one binary problem per class present in `labels`.
pub fn train(features: &FeatureMatrix, labels: &[usize], cfg: &TrainConfig) -> Result<LinearModel> {
    if labels.len() != features.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: features.n_rows(),
            got: labels.len(),
        });
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be > 0, got {}", cfg.c)));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let n = features.n_rows();
    let gram = if n <= FULL_GRAM_MAX_ROWS {
        let k: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let qi = features.row(i);
                (0..n).map(move |j| qi.dot(&features.row(j)))
            })
            .collect();
        Gram::Full { n, k }
    } else {
        Gram::OnDemand(features)
    };
    let diag = gram.diag(n);

    let fits: Vec<BinaryFit> = classes
        .par_iter()
        .map(|&class| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            solve_binary(&gram, &diag, &y, cfg.c, cfg.epochs)
        })
        .collect();

    let dims = features.n_cols();
    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    let mut trace = Vec::with_capacity(classes.len());
    for (fit, &class) in fits.into_iter().zip(&classes) {
        let mut w = vec![0.0; dims];
        for (i, &a) in fit.alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let coef = if labels[i] == class { a } else { -a };
            match features.row(i) {
                Row::Sparse(idx, vals) => {
                    for (&c, &v) in idx.iter().zip(vals) {
                        w[c] += coef * v;
                    }
                }
                Row::Dense(vals) => {
                    for (wc, &v) in w.iter_mut().zip(vals) {
                        *wc += coef * v;
                    }
                }
            }
        }
        weights.push(w);
        biases.push(fit.bias);
        trace.push(fit.trace);
    }
    Ok(LinearModel {
        classes,
        weights,
        biases,
        c: cfg.c,
        trace,
    })
}

/// Raw margins `w_c·x + b_c`, one vector per row, in `model.classes()` order.
pub fn decision_scores(model: &LinearModel, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    if features.n_cols() != model.n_dims() {
        return Err(Error::DimensionMismatch {
            expected: model.n_dims(),
            got: features.n_cols(),
        });
    }
    Ok((0..features.n_rows())
        .into_par_iter()
        .map(|i| {
            let x = features.row(i);
            model
                .weights
                .iter()
                .zip(&model.biases)
                .map(|(w, b)| x.dot(&Row::Dense(w)) + b)
                .collect()
        })
        .collect())
}

/// Argmax class per row; ties go to the lower class id.
pub fn predict(model: &LinearModel, features: &FeatureMatrix) -> Result<Vec<usize>> {
    let scores = decision_scores(model, features)?;
    Ok(scores
        .iter()
        .map(|row| {
            let mut best = 0;
            for (c, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = c;
                }
            }
            model.classes[best]
        })
        .collect())
}

pub const MODEL_MAGIC: &[u8; 4] = b"LSVM";
pub const MODEL_VERSION: u32 = 1;

/// Binary model blob: `LSVM`, version u32, n_classes u32, n_dims u64, then per class:
/// class id u32, bias f32, n_dims weights f32. All little-endian.
pub fn encode_model(model: &LinearModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.classes.len() as u32).to_le_bytes());
    out.extend_from_slice(&(model.n_dims() as u64).to_le_bytes());
    for ((&class, &b), w) in model.classes.iter().zip(&model.biases).zip(&model.weights) {
        out.extend_from_slice(&(class as u32).to_le_bytes());
        out.extend_from_slice(&(b as f32).to_le_bytes());
        for &v in w {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<LinearModel> {
    let bad = |m: &str| Error::Format(format!("model blob: {m}"));
    if bytes.len() < 20 || &bytes[0..4] != MODEL_MAGIC {
        return Err(bad("bad magic or truncated header"));
    }
    if u32::from_le_bytes(bytes[4..8].try_into().unwrap()) != MODEL_VERSION {
        return Err(bad("unsupported version"));
    }
    let n_classes = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n_dims =
        usize::try_from(u64::from_le_bytes(bytes[12..20].try_into().unwrap())).map_err(|_| bad("n_dims overflow"))?;
    let per_class = n_dims
        .checked_add(2)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| bad("n_dims overflow"))?;
    let expected = per_class
        .checked_mul(n_classes)
        .and_then(|v| v.checked_add(20))
        .ok_or_else(|| bad("size overflow"))?;
    if bytes.len() != expected {
        return Err(bad("payload length mismatch"));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let mut classes = Vec::new();
    let mut biases = Vec::new();
    let mut weights = Vec::new();
    for c in 0..n_classes {
        let base = 20 + c * per_class;
        classes.push(u32::from_le_bytes(bytes[base..base + 4].try_into().unwrap()) as usize);
        biases.push(f(base + 4));
        weights.push((0..n_dims).map(|k| f(base + 8 + 4 * k)).collect());
    }
    LinearModel::from_parts(classes, weights, biases, f64::NAN)
}

pub fn save_model(model: &LinearModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LinearModel> {
    let path = path.as_ref();
    decode_model(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representations::{DenseMatrix, MatrixKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn dense(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::dense(MatrixKind::Lsi, DenseMatrix::from_rows(rows).unwrap())
    }

    fn blobs(seed: u64, per_class: usize) -> (FeatureMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (label, cx) in [(0usize, -2.0), (1, 2.0)] {
            for _ in 0..per_class {
                rows.push(vec![cx + noise.sample(&mut rng), noise.sample(&mut rng)]);
                labels.push(label);
            }
        }
        (dense(&rows), labels)
    }

    #[test]
    fn two_point_separable() {
        let x = dense(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let m = train(&x, &[1, 0], &TrainConfig::default()).unwrap();
        assert_eq!(predict(&m, &x).unwrap(), vec![1, 0]);
        assert_eq!(m.classes(), &[0, 1]);
        let w1 = &m.weights()[1];
        assert!((w1[0] - 1.0).abs() < 1e-6 && w1[1].abs() < 1e-9);
        assert!(m.biases()[1].abs() < 1e-6);
    }

    #[test]
    fn gaussian_blobs() {
        let (train_x, train_y) = blobs(1, 20);
        let (test_x, test_y) = blobs(2, 50);
        let m = train(&train_x, &train_y, &TrainConfig::default()).unwrap();
        assert_eq!(predict(&m, &train_x).unwrap(), train_y);
        assert_eq!(predict(&m, &test_x).unwrap(), test_y);
    }

    #[test]
    fn duplicated_rows_keep_predictions() {
        let (x, y) = blobs(5, 15);
        let rows: Vec<Vec<f64>> = (0..x.n_rows()).map(|i| x.row(i).to_dense(2)).collect();
        let doubled: Vec<Vec<f64>> = rows.iter().chain(rows.iter()).cloned().collect();
        let y2: Vec<usize> = y.iter().chain(y.iter()).copied().collect();
        let (test_x, _) = blobs(9, 40);
        let a = predict(&train(&x, &y, &TrainConfig::default()).unwrap(), &test_x).unwrap();
        let b = predict(&train(&dense(&doubled), &y2, &TrainConfig::default()).unwrap(), &test_x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn objective_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<usize> = (0..60).map(|_| rng.gen_range(0..3)).collect();
        let m = train(
            &dense(&rows),
            &labels,
            &TrainConfig {
                c: 10.0,
                epochs: 30,
                seed: 0,
            },
        )
        .unwrap();
        for t in m.trace() {
            for w in t.objectives.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn bias_only_tie_break_and_argmax() {
        let m = LinearModel::from_parts(vec![0, 1], vec![vec![0.0; 2], vec![0.0; 2]], vec![1.0, -1.0], 1.0).unwrap();
        let z = dense(&[vec![0.0, 0.0]]);
        assert_eq!(predict(&m, &z).unwrap(), vec![0]);
        let tie =
            LinearModel::from_parts(vec![3, 5], vec![vec![1.0, 0.0], vec![1.0, 0.0]], vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(predict(&tie, &dense(&[vec![2.0, 1.0]])).unwrap(), vec![3]);
    }

    #[test]
    fn error_paths() {
        let x = dense(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            train(&x, &[0, 0], &TrainConfig::default()),
            Err(Error::DegenerateLabels)
        ));
        assert!(matches!(
            train(&x, &[0], &TrainConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(train(
            &x,
            &[0, 1],
            &TrainConfig {
                c: 0.0,
                ..TrainConfig::default()
            }
        )
        .is_err());
        let m = train(&x, &[0, 1], &TrainConfig::default()).unwrap();
        assert!(predict(&m, &dense(&[vec![1.0, 2.0]])).is_err());
    }

    #[test]
    fn optimal_bias_minimizes_hinge() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..15);
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
            y[0] = 1.0;
            y[1] = -1.0;
            let b = optimal_bias(&s, &y);
            let best = hinge_sum(&s, &y, b);
            for step in -400..=400 {
                let cand = step as f64 * 0.01;
                assert!(best <= hinge_sum(&s, &y, cand) + 1e-12);
            }
        }
    }

    #[test]
    fn model_blob_round_trip() {
        let (x, y) = blobs(4, 10);
        let m = train(&x, &y, &TrainConfig::default()).unwrap();
        let bytes = encode_model(&m);
        assert_eq!(&bytes[0..4], b"LSVM");
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back.classes(), m.classes());
        assert_eq!(predict(&back, &x).unwrap(), predict(&m, &x).unwrap());
        assert!(decode_model(&bytes[..bytes.len() - 2]).is_err());
    }
}
