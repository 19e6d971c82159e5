//! Labeled corpora, stratified cross-validation folds and pool/test splits.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A single labeled text. `label` is the dense class id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub text: String,
    pub label: usize,
}

/// Input file layout accepted by [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// One JSON object per line with string keys `text` and `label`.
    Jsonl,
    /// `text<TAB>label`, no header.
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format {other:?} (expected jsonl or tsv)"
            ))),
        }
    }
}

impl CorpusFormat {
    /// Guess from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// Documents plus the bijection between class strings and dense ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    label_names: Vec<String>,
}

impl Corpus {
    /// Build a corpus from `(text, label)` pairs. Ids follow input order and
    /// class ids follow first appearance.
    pub fn from_records<I, T, L>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, L)>,
        T: Into<String>,
        L: AsRef<str>,
    {
        let mut label_names: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let mut documents = Vec::new();
        for (i, (text, label)) in records.into_iter().enumerate() {
            let text = text.into();
            if text.trim().is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty text".into(),
                });
            }
            let label = label.as_ref();
            let class = match lookup.get(label) {
                Some(&c) => c,
                None => {
                    let c = label_names.len();
                    label_names.push(label.to_string());
                    lookup.insert(label.to_string(), c);
                    c
                }
            };
            documents.push(Document {
                id: documents.len(),
                text,
                label: class,
            });
        }
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if label_names.len() < 2 {
            return Err(Error::TooFewClasses(label_names.len()));
        }
        Ok(Corpus { documents, label_names })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: usize) -> Option<&Document> {
        self.documents.get(id)
    }

    /// Class names indexed by dense class id.
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|n| n == name)
    }

    pub fn texts<'a>(&'a self, ids: &'a [usize]) -> impl Iterator<Item = &'a str> + 'a {
        ids.iter().map(move |&i| self.documents[i].text.as_str())
    }

    /// Labels for `ids`. This is the oracle labeling step; the selection stage never calls it.
    pub fn labels(&self, ids: &[usize]) -> Vec<usize> {
        ids.iter().map(|&i| self.documents[i].label).collect()
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    text: String,
    label: JsonLabel,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonLabel {
    Str(String),
    Int(i64),
}

/// Load a labeled corpus from disk.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in raw.lines().enumerate() {
        let line_no = n + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let (text, label) = match format {
            CorpusFormat::Jsonl => {
                let rec: JsonRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                let label = match rec.label {
                    JsonLabel::Str(s) => s,
                    JsonLabel::Int(i) => i.to_string(),
                };
                (rec.text, label)
            }
            CorpusFormat::Tsv => {
                let (text, label) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected text<TAB>label".into(),
                })?;
                (text.to_string(), label.trim().to_string())
            }
        };
        if text.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty text".into(),
            });
        }
        if label.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty label".into(),
            });
        }
        records.push((text, label));
    }
    Corpus::from_records(records)
}

/// Assignment of every document to one of `n_folds` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

/// Stratified folds: each class is shuffled with `seed` and dealt round-robin.
///
/// Dealing continues from the fold where the previous class stopped, so fold
/// sizes stay within one of each other as well as per-class counts.
pub fn make_folds(corpus: &Corpus, n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if n_folds < 2 {
        return Err(Error::InvalidFolds(format!("n_folds must be >= 2, got {n_folds}")));
    }
    if n_folds > corpus.len() {
        return Err(Error::InvalidFolds(format!(
            "n_folds={n_folds} exceeds corpus size {}",
            corpus.len()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); corpus.n_classes()];
    for doc in corpus.documents() {
        by_class[doc.label].push(doc.id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; corpus.len()];
    let mut next = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &id in members.iter() {
            assignments[id] = next;
            next = (next + 1) % n_folds;
        }
    }
    Ok(FoldPlan {
        n_folds,
        seed,
        assignments,
    })
}

impl FoldPlan {
    /// Number of documents per fold.
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Split ids into `(pool, test)` for `fold`. Both keep corpus order.
pub fn fold_split(corpus: &Corpus, plan: &FoldPlan, fold: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if fold >= plan.n_folds {
        return Err(Error::OutOfRange {
            index: fold,
            len: plan.n_folds,
        });
    }
    if plan.assignments.len() != corpus.len() {
        return Err(Error::DimensionMismatch {
            expected: corpus.len(),
            got: plan.assignments.len(),
        });
    }
    let (test, pool): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&id| plan.assignments[id] == fold);
    Ok((pool, test))
}

/// Folds used by default: 10, or 5 for corpora above 100k documents.
pub fn default_n_folds(corpus_size: usize) -> usize {
    if corpus_size > 100_000 {
        5
    } else {
        10
    }
}
