use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::spec::{ReprPair, ReprSpec};
use crate::evaluation::{mean_ci, wilcoxon_paired, TestMethod};
use crate::selection::AuditRecord;
use crate::{Error, Result};

/// Confidence level of aggregate intervals.
pub const CI_LEVEL: f64 = 0.95;

/// Outcome of one (fold, budget, representation pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub fold: usize,
    pub budget: usize,
    pub pair: ReprPair,
    /// Instances actually labeled; below `budget` when the selection ran out.
    pub n_selected: usize,
    pub exhausted: bool,
    pub macro_f1: Option<f64>,
    /// Why the cell has no score.
    pub failure: Option<String>,
}

impl Cell {
    pub fn is_ok(&self) -> bool {
        self.macro_f1.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub budget: usize,
    pub pair: ReprPair,
    pub n_ok: usize,
    pub n_failed: usize,
    pub n_exhausted: usize,
    pub mean: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
}

/// Paired Wilcoxon test between two configurations at one budget, over the folds where both succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub budget: usize,
    pub a: ReprPair,
    pub b: ReprPair,
    pub n_paired: usize,
    /// Mean of `a - b` over the paired folds.
    pub mean_difference: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub method: Option<TestMethod>,
    pub significant: bool,
}

/// The selection scan of one fold, run once at the largest budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionAudit {
    pub fold: usize,
    pub selection: ReprSpec,
    pub k: usize,
    pub dist_min: f64,
    pub selected: Vec<usize>,
    pub exhausted: bool,
    pub audit: Vec<AuditRecord>,
    pub failure: Option<String>,
}

/// Facts about the run that are not results. Kept out of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeInfo {
    pub version: String,
    pub threads: usize,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub n_folds: usize,
    pub seed: u64,
    pub budgets: Vec<usize>,
    pub pairs: Vec<ReprPair>,
    /// Ordered by pair, then budget, then fold.
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
    pub comparisons: Vec<Comparison>,
    pub selections: Vec<SelectionAudit>,
    pub runtime: RuntimeInfo,
}

impl ExperimentReport {
    pub fn cell(&self, fold: usize, budget: usize, pair: &ReprPair) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.fold == fold && c.budget == budget && &c.pair == pair)
    }

    pub fn aggregate(&self, budget: usize, pair: &ReprPair) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.budget == budget && &a.pair == pair)
    }

    /// Aggregates and comparisons as they follow from `cells`.
    pub fn recompute(&self) -> (Vec<Aggregate>, Vec<Comparison>) {
        summarize(&self.pairs, &self.budgets, &self.cells)
    }
}

fn scores_by_fold(cells: &[&Cell]) -> BTreeMap<usize, f64> {
    cells.iter().filter_map(|c| c.macro_f1.map(|f| (c.fold, f))).collect()
}

pub(crate) fn summarize(pairs: &[ReprPair], budgets: &[usize], cells: &[Cell]) -> (Vec<Aggregate>, Vec<Comparison>) {
    let mut groups: BTreeMap<(usize, usize), Vec<&Cell>> = BTreeMap::new();
    for c in cells {
        if let Some(p) = pairs.iter().position(|p| p == &c.pair) {
            groups.entry((p, c.budget)).or_default().push(c);
        }
    }
    let empty = Vec::new();
    let mut aggregates = Vec::new();
    for (p, pair) in pairs.iter().enumerate() {
        for &budget in budgets {
            let group = groups.get(&(p, budget)).unwrap_or(&empty);
            let scores: Vec<f64> = scores_by_fold(group).into_values().collect();
            let n_ok = scores.len();
            let (mean, lower, upper) = match n_ok {
                0 => (None, None, None),
                1 => (Some(scores[0]), None, None),
                _ => match mean_ci(&scores, CI_LEVEL) {
                    Ok(ci) => (Some(ci.mean), Some(ci.lower), Some(ci.upper)),
                    Err(_) => (None, None, None),
                },
            };
            aggregates.push(Aggregate {
                budget,
                pair: pair.clone(),
                n_ok,
                n_failed: group.len() - n_ok,
                n_exhausted: group.iter().filter(|c| c.exhausted).count(),
                mean,
                ci_lower: lower,
                ci_upper: upper,
            });
        }
    }

    let mut comparisons = Vec::new();
    for &budget in budgets {
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let sa = scores_by_fold(groups.get(&(i, budget)).unwrap_or(&empty));
                let sb = scores_by_fold(groups.get(&(j, budget)).unwrap_or(&empty));
                let (a, b): (Vec<f64>, Vec<f64>) = sa.iter().filter_map(|(f, &x)| sb.get(f).map(|&y| (x, y))).unzip();
                let mut cmp = Comparison {
                    budget,
                    a: pairs[i].clone(),
                    b: pairs[j].clone(),
                    n_paired: a.len(),
                    mean_difference: None,
                    statistic: None,
                    p_value: None,
                    method: None,
                    significant: false,
                };
                if !a.is_empty() {
                    let diff = a.iter().zip(&b).map(|(x, y)| x - y).sum::<f64>() / a.len() as f64;
                    cmp.mean_difference = Some(diff);
                    if let Ok(t) = wilcoxon_paired(&a, &b) {
                        cmp.statistic = Some(t.statistic);
                        cmp.p_value = Some(t.p_value);
                        cmp.method = Some(t.method);
                        cmp.significant = t.significant();
                    }
                }
                comparisons.push(cmp);
            }
        }
    }
    (aggregates, comparisons)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

pub const CSV_HEADER: [&str; 15] = [
    "dataset",
    "row_type",
    "fold",
    "budget",
    "selection_repr",
    "classification_repr",
    "macro_f1",
    "ci_lower",
    "ci_upper",
    "n_selected",
    "exhausted",
    "status",
    "compared_with",
    "p_value",
    "significant",
];

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// CSV text of `report`: cell rows, then one aggregate row per (pair, budget), then comparison rows.
pub fn to_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let ds = report.dataset.as_str();
    for c in &report.cells {
        let status = c.failure.clone().unwrap_or_else(|| "ok".into());
        w.write_record([
            ds,
            "cell",
            &c.fold.to_string(),
            &c.budget.to_string(),
            &c.pair.selection.to_string(),
            &c.pair.classification.to_string(),
            &num(c.macro_f1),
            "",
            "",
            &c.n_selected.to_string(),
            &c.exhausted.to_string(),
            &status,
            "",
            "",
            "",
        ])?;
    }
    for a in &report.aggregates {
        let status = if a.n_failed == 0 {
            "ok".to_string()
        } else {
            format!("{} of {} folds failed", a.n_failed, a.n_ok + a.n_failed)
        };
        w.write_record([
            ds,
            "aggregate",
            "all",
            &a.budget.to_string(),
            &a.pair.selection.to_string(),
            &a.pair.classification.to_string(),
            &num(a.mean),
            &num(a.ci_lower),
            &num(a.ci_upper),
            "",
            &(a.n_exhausted > 0).to_string(),
            &status,
            "",
            "",
            "",
        ])?;
    }
    for c in &report.comparisons {
        let status = if c.p_value.is_some() { "ok" } else { "not tested" };
        w.write_record([
            ds,
            "comparison",
            "all",
            &c.budget.to_string(),
            &c.a.selection.to_string(),
            &c.a.classification.to_string(),
            &num(c.mean_difference),
            "",
            "",
            "",
            "",
            status,
            &c.b.to_string(),
            &num(c.p_value),
            &c.significant.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("CSV buffer: {e}")))
}

/// Write `report` to `path` as CSV or JSON.
pub fn emit_report(report: &ExperimentReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        ReportFormat::Csv => to_csv(report)?,
        ReportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(report)?;
            v.push(b'\n');
            v
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a report written with [`ReportFormat::Json`].
pub fn load_report(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&raw)?)
}
