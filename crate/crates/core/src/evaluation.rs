//! Macro-F1, t-based confidence intervals and the paired Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::{Error, Result};

/// Largest number of non-zero differences for which the exact null distribution is used.
pub const EXACT_WILCOXON_MAX_N: usize = 25;
/// Two-sided significance level.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn new(y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::DimensionMismatch {
                expected: y_true.len(),
                got: y_pred.len(),
            });
        }
        if y_true.is_empty() {
            return Err(Error::InvalidArgument("cannot evaluate zero predictions".into()));
        }
        let n_classes = y_true.iter().chain(y_pred).max().unwrap() + 1;
        let mut counts = vec![0; n_classes * n_classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            counts[t * n_classes + p] += 1;
        }
        Ok(ConfusionMatrix { n_classes, counts })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> usize {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn support(&self, class: usize) -> usize {
        (0..self.n_classes).map(|p| self.get(class, p)).sum()
    }

    fn predicted(&self, class: usize) -> usize {
        (0..self.n_classes).map(|t| self.get(t, class)).sum()
    }

    /// F1 of one class with 0/0 taken as 0.
    pub fn f1(&self, class: usize) -> f64 {
        let tp = self.get(class, class) as f64;
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        let precision = ratio(tp, self.predicted(class));
        let recall = ratio(tp, self.support(class));
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }

    /// Unweighted mean F1 over classes that occur in the ground truth.
    pub fn macro_f1(&self) -> f64 {
        let present: Vec<usize> = (0..self.n_classes).filter(|&c| self.support(c) > 0).collect();
        present.iter().map(|&c| self.f1(c)).sum::<f64>() / present.len() as f64
    }
}

pub fn macro_f1(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    Ok(ConfusionMatrix::new(y_true, y_pred)?.macro_f1())
}

/// Mean with a two-sided Student-t interval at `level` (e.g. 0.95).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl MeanCi {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

pub fn mean_ci(samples: &[f64], level: f64) -> Result<MeanCi> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "confidence interval needs >= 2 samples, got {n}"
        )));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must be in (0, 1), got {level}")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok(MeanCi {
            mean: samples[0],
            lower: samples[0],
            upper: samples[0],
        });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let half = t * var.sqrt() / (n as f64).sqrt();
    Ok(MeanCi {
        mean,
        lower: mean - half,
        upper: mean + half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub n_effective: usize,
    pub method: TestMethod,
}

impl PairedTestResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE_LEVEL
    }
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &k in &order[start..=end] {
            ranks[k] = rank;
        }
        start = end + 1;
    }
    ranks
}

struct SignedRanks {
    ranks: Vec<f64>,
    w_plus: f64,
    w_minus: f64,
}

fn signed_ranks(a: &[f64], b: &[f64]) -> Result<SignedRanks> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "Wilcoxon test needs >= 5 pairs, got {}",
            a.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);
    let w_minus = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d < 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);
    Ok(SignedRanks { ranks, w_plus, w_minus })
}

/// `P(W+ <= w)` under the null, counting all `2ⁿ` sign assignments.
/// Ranks are doubled so tied half-ranks stay integral.
fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let hits: u64 = counts[..=limit.min(total)].iter().sum();
    hits as f64 / 2f64.powi(ranks.len() as i32)
}

fn normal_two_sided(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    (2.0 * std.sf(z)).min(1.0)
}

/// Two-sided paired Wilcoxon signed-rank test; exact when at most
/// [`EXACT_WILCOXON_MAX_N`] differences are non-zero, normal approximation otherwise.
pub fn wilcoxon_paired(a: &[f64], b: &[f64]) -> Result<PairedTestResult> {
    let n_eff = a.iter().zip(b).filter(|(x, y)| *x != *y).count();
    let method = if n_eff <= EXACT_WILCOXON_MAX_N {
        TestMethod::Exact
    } else {
        TestMethod::NormalApproximation
    };
    wilcoxon_paired_with(a, b, method)
}

/// As [`wilcoxon_paired`] with the p-value method forced.
pub fn wilcoxon_paired_with(a: &[f64], b: &[f64], method: TestMethod) -> Result<PairedTestResult> {
    let sr = signed_ranks(a, b)?;
    let n_effective = sr.ranks.len();
    if n_effective == 0 {
        return Ok(PairedTestResult {
            statistic: 0.0,
            p_value: 1.0,
            n_effective: 0,
            method: TestMethod::Exact,
        });
    }
    let w = sr.w_plus.min(sr.w_minus);
    let p_value = match method {
        TestMethod::Exact => {
            if n_effective > 62 {
                return Err(Error::InvalidArgument(format!(
                    "exact Wilcoxon enumeration is limited to 62 pairs, got {n_effective}"
                )));
            }
            (2.0 * exact_lower_tail(&sr.ranks, w)).min(1.0)
        }
        TestMethod::NormalApproximation => normal_two_sided(&sr.ranks, w),
    };
    Ok(PairedTestResult {
        statistic: w,
        p_value,
        n_effective,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn macro_f1_hand_computed() {
        let f = macro_f1(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert!((f - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-12);
        assert_eq!(macro_f1(&[2, 0, 1], &[2, 0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn missing_prediction_class_scores_zero() {
        let cm = ConfusionMatrix::new(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
        assert_eq!(cm.f1(1), 0.0);
        assert!((cm.macro_f1() - (2.0 * 0.5 * 1.0 / 1.5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn classes_absent_from_truth_are_ignored() {
        // class 2 is only predicted: it lowers precision of nothing present but adds no term
        let f = macro_f1(&[0, 1], &[0, 2]).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_errors() {
        assert!(macro_f1(&[0, 1], &[0]).is_err());
        assert!(macro_f1(&[], &[]).is_err());
    }

    #[test]
    fn confusion_total() {
        let cm = ConfusionMatrix::new(&[0, 1, 1, 2], &[1, 1, 0, 2]).unwrap();
        assert_eq!(cm.total(), 4);
        assert_eq!(cm.get(1, 0), 1);
    }

    #[test]
    fn ci_values() {
        let c = mean_ci(&[0.4, 0.4, 0.4], 0.95).unwrap();
        assert_eq!((c.lower, c.upper), (0.4, 0.4));
        let c = mean_ci(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.95).unwrap();
        assert!((c.mean - 3.0).abs() < 1e-12);
        // t(4, 0.975) = 2.7764451
        assert!((c.half_width() - 2.776_445_1 * 2.5f64.sqrt() / 5f64.sqrt()).abs() < 1e-6);
        let c = mean_ci(&[0.0, 1.0], 0.95).unwrap();
        assert!((c.half_width() - 6.353).abs() < 1e-3);
        assert!(mean_ci(&[1.0], 0.95).is_err());
    }

    #[test]
    fn ci_shrinks_with_root_n() {
        let small: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let large: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let (a, b) = (mean_ci(&small, 0.95).unwrap(), mean_ci(&large, 0.95).unwrap());
        assert!(b.half_width() < a.half_width() / 1.8);
    }

    #[test]
    fn identical_samples() {
        let a = [0.5, 0.6, 0.7, 0.8, 0.9];
        let r = wilcoxon_paired(&a, &a).unwrap();
        assert_eq!((r.p_value, r.n_effective, r.method), (1.0, 0, TestMethod::Exact));
    }

    #[test]
    fn six_positive_differences() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.9, 1.8, 2.7, 3.6, 4.5, 5.4];
        let r = wilcoxon_paired(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.03125);
        assert!(r.significant());
    }

    #[test]
    fn too_few_pairs() {
        assert!(wilcoxon_paired(&[1.0; 4], &[0.0; 4]).is_err());
        assert!(wilcoxon_paired(&[1.0; 5], &[0.0; 6]).is_err());
    }

    #[test]
    fn tied_ranks_average() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn symmetric_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [5, 8, 30] {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            assert_eq!(
                wilcoxon_paired(&a, &b).unwrap().p_value,
                wilcoxon_paired(&b, &a).unwrap().p_value
            );
        }
    }

    #[test]
    fn method_switches_above_25() {
        let a: Vec<f64> = (0..26).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..26)
            .map(|i| i as f64 + if i % 3 == 0 { 0.5 } else { -0.25 })
            .collect();
        assert_eq!(wilcoxon_paired(&a, &b).unwrap().method, TestMethod::NormalApproximation);
        assert_eq!(wilcoxon_paired(&a[..25], &b[..25]).unwrap().method, TestMethod::Exact);
    }
}
