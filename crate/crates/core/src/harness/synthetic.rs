//! Seeded synthetic corpora with known class structure, for demos and tests.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::representations::{DenseMatrix, FeatureMatrix, MatrixKind};
use crate::{Error, Result};

const CLASS_NAMES: [&str; 8] = [
    "astronomy",
    "cooking",
    "finance",
    "sailing",
    "botany",
    "chess",
    "geology",
    "music",
];
const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

/// Documents mix a class-specific topic vocabulary (Zipf-weighted) with a
/// shared background vocabulary (uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCorpusConfig {
    pub n_docs: usize,
    pub n_classes: usize,
    pub topic_words: usize,
    pub background_words: usize,
    pub doc_len: usize,
    /// Fraction of each document's tokens drawn from its class topic.
    pub topic_share: f64,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    /// Settings of the bundled `data/synthetic_400.jsonl`.
    fn default() -> Self {
        TopicCorpusConfig {
            n_docs: 400,
            n_classes: 4,
            topic_words: 80,
            background_words: 800,
            doc_len: 80,
            topic_share: 0.4,
            seed: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticDoc {
    pub text: String,
    pub label: String,
}

pub fn class_name(c: usize) -> String {
    CLASS_NAMES
        .get(c)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("class{c}"))
}

fn vocabulary(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=4);
        let w: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Document `i` belongs to class `i % n_classes`.
pub fn topic_corpus(cfg: &TopicCorpusConfig) -> Result<Vec<SyntheticDoc>> {
    if cfg.n_classes < 2 || cfg.n_docs < cfg.n_classes {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes and one document per class, got {} docs / {} classes",
            cfg.n_docs, cfg.n_classes
        )));
    }
    if cfg.topic_words == 0 || cfg.background_words == 0 || cfg.doc_len == 0 || !(0.0..=1.0).contains(&cfg.topic_share)
    {
        return Err(Error::InvalidArgument("degenerate topic corpus settings".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = vocabulary(cfg.n_classes * cfg.topic_words + cfg.background_words, &mut rng);
    let (topics, background) = words.split_at(cfg.n_classes * cfg.topic_words);
    let zipf = WeightedIndex::new((1..=cfg.topic_words).map(|r| 1.0 / r as f64)).expect("positive weights");
    let n_topic = (cfg.topic_share * cfg.doc_len as f64).round() as usize;

    Ok((0..cfg.n_docs)
        .map(|i| {
            let class = i % cfg.n_classes;
            let topic = &topics[class * cfg.topic_words..(class + 1) * cfg.topic_words];
            let mut tokens: Vec<&str> = (0..cfg.doc_len)
                .map(|t| {
                    if t < n_topic {
                        topic[zipf.sample(&mut rng)].as_str()
                    } else {
                        background.choose(&mut rng).unwrap().as_str()
                    }
                })
                .collect();
            tokens.shuffle(&mut rng);
            SyntheticDoc {
                text: tokens.join(" "),
                label: class_name(class),
            }
        })
        .collect())
}

/// JSONL with `id`, `text` and `label` fields, loadable by [`crate::corpus::load_corpus`].
pub fn write_jsonl(docs: &[SyntheticDoc], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for (id, d) in docs.iter().enumerate() {
        serde_json::to_writer(
            &mut buf,
            &serde_json::json!({"id": id, "text": d.text, "label": d.label}),
        )?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Dense vectors: a random unit centroid per class plus isotropic Gaussian noise of scale `noise`.
pub fn toy_embeddings(labels: &[usize], dims: usize, noise: f64, seed: u64) -> Result<FeatureMatrix> {
    if dims == 0 {
        return Err(Error::InvalidArgument("dims must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let centroids: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| {
            let v: Vec<f64> = (0..dims).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| {
            centroids[l]
                .iter()
                .map(|&c| c + noise * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Ok(FeatureMatrix::dense(
        MatrixKind::Embedding,
        DenseMatrix::from_rows(&rows)?,
    ))
}
