use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sidecar::{SidecarConfig, Variant};
use crate::classifier::{DEFAULT_C, DEFAULT_EPOCHS};
use crate::corpus::CorpusFormat;
use crate::representations::{MatrixKind, DEFAULT_MIN_DF};
use crate::selection::{default_dist_min, DEFAULT_K};
use crate::{Error, Result};

/// Budgets swept when a spec gives none.
pub const DEFAULT_BUDGETS: [usize; 6] = [50, 100, 200, 400, 800, 1600];
/// Latent dimensions of the default LSI sweep.
pub const DEFAULT_SWEEP_DIMS: [usize; 6] = [96, 192, 384, 768, 1536, 3072];

/// A representation usable in either stage. Written as `bow`, `lsi(768)` or `embedding(tag)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReprSpec {
    Bow,
    Lsi(usize),
    Embedding(String),
}

impl ReprSpec {
    pub fn kind(&self) -> MatrixKind {
        match self {
            ReprSpec::Bow => MatrixKind::Bow,
            ReprSpec::Lsi(_) => MatrixKind::Lsi,
            ReprSpec::Embedding(_) => MatrixKind::Embedding,
        }
    }
}

impl fmt::Display for ReprSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReprSpec::Bow => write!(f, "bow"),
            ReprSpec::Lsi(d) => write!(f, "lsi({d})"),
            ReprSpec::Embedding(tag) => write!(f, "embedding({tag})"),
        }
    }
}

impl FromStr for ReprSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::InvalidArgument(format!(
                "bad representation {s:?}: expected bow, lsi(<d>) or embedding(<tag>)"
            ))
        };
        if s.eq_ignore_ascii_case("bow") {
            return Ok(ReprSpec::Bow);
        }
        let (head, arg) = if let Some((h, rest)) = s.split_once('(') {
            (h, rest.strip_suffix(')').ok_or_else(bad)?)
        } else if let Some((h, a)) = s.split_once(':') {
            (h, a)
        } else {
            return Err(bad());
        };
        match head.to_ascii_lowercase().as_str() {
            "lsi" => arg.trim().parse().map(ReprSpec::Lsi).map_err(|_| bad()),
            "embedding" | "emb" if !arg.trim().is_empty() => Ok(ReprSpec::Embedding(arg.trim().to_string())),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ReprSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReprSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Representation used to select instances and representation used to classify them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReprPair {
    pub selection: ReprSpec,
    pub classification: ReprSpec,
}

impl fmt::Display for ReprPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.selection, self.classification)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSettings {
    pub k: Option<usize>,
    /// Overrides the per-kind default for every selection representation.
    pub dist_min: Option<f64>,
}

impl SelectionSettings {
    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    pub fn dist_min_for(&self, kind: MatrixKind) -> f64 {
        self.dist_min.unwrap_or_else(|| default_dist_min(kind))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSettings {
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_c() -> f64 {
    DEFAULT_C
}

fn default_epochs() -> usize {
    DEFAULT_EPOCHS
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            c: DEFAULT_C,
            epochs: DEFAULT_EPOCHS,
        }
    }
}

fn default_min_df() -> usize {
    DEFAULT_MIN_DF
}

fn default_budgets() -> Vec<usize> {
    DEFAULT_BUDGETS.to_vec()
}

/// Everything needed to run one cross-validated experiment. Loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Name written to the `dataset` report column; defaults to the corpus file stem.
    #[serde(default)]
    pub dataset: Option<String>,
    pub corpus: PathBuf,
    #[serde(default)]
    pub format: Option<CorpusFormat>,
    /// Defaults to 10, or 5 above 100k documents.
    #[serde(default)]
    pub n_folds: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    /// Shorthand for a single pair; merged with `pairs`.
    #[serde(default)]
    pub selection_repr: Option<ReprSpec>,
    #[serde(default)]
    pub classification_repr: Option<ReprSpec>,
    #[serde(default)]
    pub pairs: Vec<ReprPair>,
    #[serde(default)]
    pub selection: SelectionSettings,
    #[serde(default)]
    pub classifier: ClassifierSettings,
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    /// Embedding tag to DVEC file holding one row per corpus document.
    #[serde(default)]
    pub embeddings: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub sidecar: Option<SidecarConfig>,
}

impl ExperimentSpec {
    /// Minimal spec for `corpus` with defaults everywhere.
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            dataset: None,
            corpus: corpus.into(),
            format: None,
            n_folds: None,
            seed: 0,
            budgets: default_budgets(),
            selection_repr: None,
            classification_repr: None,
            pairs: Vec::new(),
            selection: SelectionSettings::default(),
            classifier: ClassifierSettings::default(),
            min_df: DEFAULT_MIN_DF,
            embeddings: BTreeMap::new(),
            sidecar: None,
        }
    }

    /// Parse a JSON spec; relative paths are resolved against the spec's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&raw)?;
        if let Some(base) = path.parent() {
            spec.resolve_paths(base);
        }
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        for p in self.embeddings.values_mut() {
            fix(p);
        }
        if let Some(sc) = &mut self.sidecar {
            if let Some(w) = &mut sc.work_dir {
                fix(w);
            }
        }
    }

    pub fn dataset_name(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            self.corpus
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".into())
        })
    }

    pub fn corpus_format(&self) -> CorpusFormat {
        self.format.unwrap_or_else(|| CorpusFormat::from_path(&self.corpus))
    }

    /// Distinct representation pairs in first-mention order.
    pub fn resolved_pairs(&self) -> Vec<ReprPair> {
        let mut out: Vec<ReprPair> = Vec::new();
        if self.selection_repr.is_some() || self.classification_repr.is_some() {
            let sel = self.selection_repr.clone().unwrap_or(ReprSpec::Bow);
            let cls = self.classification_repr.clone().unwrap_or_else(|| sel.clone());
            out.push(ReprPair {
                selection: sel,
                classification: cls,
            });
        }
        for p in &self.pairs {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        if out.is_empty() {
            out.push(ReprPair {
                selection: ReprSpec::Bow,
                classification: ReprSpec::Bow,
            });
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if self.budgets.is_empty() {
            return invalid("budgets must not be empty".into());
        }
        if self.budgets[0] == 0 || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!(
                "budgets must be positive and strictly increasing: {:?}",
                self.budgets
            ));
        }
        if matches!(self.n_folds, Some(n) if n < 2) {
            return invalid("n_folds must be >= 2".into());
        }
        if self.min_df == 0 {
            return invalid("min_df must be >= 1".into());
        }
        if self.selection.k == Some(0) {
            return invalid("selection.k must be >= 1".into());
        }
        if let Some(d) = self.selection.dist_min {
            if !(0.0..=1.0).contains(&d) {
                return invalid(format!("selection.dist_min must be in [0, 1], got {d}"));
            }
        }
        if self.classifier.c.is_nan() || self.classifier.c <= 0.0 {
            return invalid("classifier.c must be > 0".into());
        }
        for pair in self.resolved_pairs() {
            for (stage, repr) in [("selection", &pair.selection), ("classification", &pair.classification)] {
                match repr {
                    ReprSpec::Lsi(0) => return invalid(format!("{stage} representation lsi(0) is invalid")),
                    ReprSpec::Embedding(tag) => {
                        if self.embeddings.contains_key(tag) {
                            continue;
                        }
                        let Some(_) = &self.sidecar else {
                            return invalid(format!(
                                "embedding tag {tag:?} has no DVEC file and no sidecar is configured"
                            ));
                        };
                        let variant: Variant = tag.parse().map_err(|_| {
                            Error::InvalidArgument(format!(
                                "embedding tag {tag:?} is neither in the manifest nor a sidecar variant"
                            ))
                        })?;
                        if stage == "selection" && variant.needs_labels() {
                            return invalid(format!("variant {tag} needs labels and cannot be used for selection"));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}
