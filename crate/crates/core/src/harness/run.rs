use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use super::report::{summarize, Cell, ExperimentReport, RuntimeInfo, SelectionAudit};
use super::sidecar::{invoke_sidecar, write_texts, LabeledRef, SidecarRequest, TextRecord, Variant};
use super::spec::{ExperimentSpec, ReprPair, ReprSpec};
use crate::classifier::{predict, train, TrainConfig};
use crate::corpus::{default_n_folds, fold_split, load_corpus, make_folds, Corpus};
use crate::evaluation::macro_f1;
use crate::representations::{
    fit_vocabulary, load_embeddings, lsi_fit_with, lsi_project, similarity_view, tfidf, FeatureMatrix, SvdOptions,
};
use crate::selection::{dwds_select, SelectionConfig, SelectionResult};
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero when checking LSI rank.
const RANK_TOL: f64 = 1e-10;

/// Pool and test rows of one representation within a fold.
struct Split {
    pool: FeatureMatrix,
    test: FeatureMatrix,
}

type Outcome<T> = std::result::Result<T, String>;

struct Shared<'a> {
    spec: &'a ExperimentSpec,
    corpus: &'a Corpus,
    dataset: String,
    manifest: BTreeMap<String, Outcome<FeatureMatrix>>,
}

struct FoldContext<'a> {
    shared: &'a Shared<'a>,
    fold: usize,
    pool: Vec<usize>,
    test: Vec<usize>,
    cache: BTreeMap<ReprSpec, Outcome<Split>>,
}

impl<'a> FoldContext<'a> {
    fn features(&mut self, repr: &ReprSpec) -> Outcome<&Split> {
        if !self.cache.contains_key(repr) {
            let built = self.build(repr);
            self.cache.insert(repr.clone(), built);
        }
        self.cache[repr].as_ref().map_err(Clone::clone)
    }

    fn build(&mut self, repr: &ReprSpec) -> Outcome<Split> {
        let spec = self.shared.spec;
        let corpus = self.shared.corpus;
        match repr {
            ReprSpec::Bow => {
                let pool_texts: Vec<&str> = corpus.texts(&self.pool).collect();
                let test_texts: Vec<&str> = corpus.texts(&self.test).collect();
                let vocab = fit_vocabulary(&pool_texts, spec.min_df).map_err(|e| e.to_string())?;
                Ok(Split {
                    pool: with_ids(tfidf(&pool_texts, &vocab), &self.pool)?,
                    test: with_ids(tfidf(&test_texts, &vocab), &self.test)?,
                })
            }
            ReprSpec::Lsi(d) => {
                let seed = spec.seed.wrapping_add(self.fold as u64);
                let bow = self.features(&ReprSpec::Bow)?;
                let opts = SvdOptions {
                    seed,
                    ..SvdOptions::default()
                };
                let model = lsi_fit_with(&bow.pool, *d, &opts).map_err(|e| e.to_string())?;
                let sv = model.singular_values();
                let rank = sv.iter().filter(|&&s| s > RANK_TOL * sv[0]).count();
                if rank < *d {
                    return Err(format!("LSI dimension d={d} exceeds the pool matrix rank {rank}"));
                }
                Ok(Split {
                    pool: lsi_project(&model, &bow.pool).map_err(|e| e.to_string())?,
                    test: lsi_project(&model, &bow.test).map_err(|e| e.to_string())?,
                })
            }
            ReprSpec::Embedding(tag) => {
                if let Some(m) = self.shared.manifest.get(tag) {
                    let m = m.as_ref().map_err(Clone::clone)?;
                    return Ok(Split {
                        pool: m.select_ids(&self.pool).map_err(|e| format!("embedding {tag}: {e}"))?,
                        test: m.select_ids(&self.test).map_err(|e| format!("embedding {tag}: {e}"))?,
                    });
                }
                let variant: Variant = tag.parse().map_err(|e: Error| e.to_string())?;
                if variant.needs_labels() {
                    return Err(format!("variant {variant} needs a labeled subset"));
                }
                self.sidecar(variant, &[], &format!("{variant}"))
            }
        }
    }

    /// Embeddings for the pool and test rows from the sidecar.
    fn sidecar(&self, variant: Variant, labeled: &[usize], name: &str) -> Outcome<Split> {
        let shared = self.shared;
        let cfg = shared
            .spec
            .sidecar
            .as_ref()
            .ok_or_else(|| format!("embedding {variant} needs a sidecar"))?;
        let dir = cfg.work_dir().join(&shared.dataset).join(format!("fold{}", self.fold));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e).to_string())?;
        let texts_path = dir.join("texts.jsonl");
        if !texts_path.exists() {
            let records: Vec<TextRecord> = self
                .pool
                .iter()
                .map(|&id| (id, "pool"))
                .chain(self.test.iter().map(|&id| (id, "test")))
                .map(|(id, split)| TextRecord {
                    id,
                    text: shared.corpus.documents()[id].text.clone(),
                    split: split.into(),
                })
                .collect();
            write_texts(&texts_path, &records).map_err(|e| e.to_string())?;
        }
        let names = shared.corpus.label_names();
        let request = SidecarRequest {
            variant,
            model: cfg.model.clone(),
            pool_texts: texts_path,
            labeled: labeled
                .iter()
                .map(|&id| LabeledRef {
                    id,
                    label: names[shared.corpus.documents()[id].label].clone(),
                })
                .collect(),
            out: dir.join(format!("{name}.dvec")),
            epochs_mlm: cfg.epochs_mlm,
            epochs_atc: cfg.epochs_atc,
            lr: cfg.lr,
            seed: shared.spec.seed.wrapping_add(self.fold as u64),
        };
        let expected: Vec<usize> = self.pool.iter().chain(&self.test).copied().collect();
        let request_path = dir.join(format!("{name}.request.json"));
        let (matrix, _) = invoke_sidecar(cfg, &request, &request_path, &expected).map_err(|e| match e {
            Error::Sidecar { message, log } if !log.is_empty() => {
                log::warn!("sidecar log for {}:\n{log}", request_path.display());
                format!("sidecar error: {message}")
            }
            other => other.to_string(),
        })?;
        Ok(Split {
            pool: matrix.select_ids(&self.pool).map_err(|e| e.to_string())?,
            test: matrix.select_ids(&self.test).map_err(|e| e.to_string())?,
        })
    }
}

fn with_ids(m: FeatureMatrix, ids: &[usize]) -> Outcome<FeatureMatrix> {
    m.with_ids(ids.to_vec()).map_err(|e| e.to_string())
}

fn file_safe(repr: &ReprSpec) -> String {
    repr.to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

struct FoldOutput {
    cells: Vec<(usize, usize, Cell)>,
    audits: Vec<SelectionAudit>,
}

fn run_fold(shared: &Shared<'_>, pairs: &[ReprPair], pool: Vec<usize>, test: Vec<usize>, fold: usize) -> FoldOutput {
    let spec = shared.spec;
    let max_budget = *spec.budgets.last().expect("validated non-empty budgets");
    let mut ctx = FoldContext {
        shared,
        fold,
        pool,
        test,
        cache: BTreeMap::new(),
    };

    let mut selections: BTreeMap<ReprSpec, Outcome<SelectionResult>> = BTreeMap::new();
    let mut audits = Vec::new();
    for pair in pairs {
        let repr = &pair.selection;
        if selections.contains_key(repr) {
            continue;
        }
        let k = spec.selection.k();
        let dist_min = spec.selection.dist_min_for(repr.kind());
        let result = ctx.features(repr).and_then(|split| {
            let cfg = SelectionConfig::new(max_budget, k, dist_min).map_err(|e| e.to_string())?;
            dwds_select(&similarity_view(&split.pool), &cfg).map_err(|e| e.to_string())
        });
        audits.push(match &result {
            Ok(r) => SelectionAudit {
                fold,
                selection: repr.clone(),
                k,
                dist_min,
                selected: r.selected.clone(),
                exhausted: r.exhausted,
                audit: r.audit.clone(),
                failure: None,
            },
            Err(e) => SelectionAudit {
                fold,
                selection: repr.clone(),
                k,
                dist_min,
                selected: Vec::new(),
                exhausted: false,
                audit: Vec::new(),
                failure: Some(e.clone()),
            },
        });
        selections.insert(repr.clone(), result);
    }

    let train_cfg = TrainConfig {
        c: spec.classifier.c,
        epochs: spec.classifier.epochs,
        seed: spec.seed,
    };
    let mut cells = Vec::new();
    for (p, pair) in pairs.iter().enumerate() {
        for &budget in &spec.budgets {
            let mut cell = Cell {
                fold,
                budget,
                pair: pair.clone(),
                n_selected: 0,
                exhausted: false,
                macro_f1: None,
                failure: None,
            };
            match &selections[&pair.selection] {
                Err(e) => cell.failure = Some(format!("selection failed: {e}")),
                Ok(sel) => {
                    let chosen = &sel.selected[..budget.min(sel.selected.len())];
                    cell.n_selected = chosen.len();
                    cell.exhausted = chosen.len() < budget;
                    match evaluate(&mut ctx, pair, budget, chosen, &train_cfg) {
                        Ok(f1) => cell.macro_f1 = Some(f1),
                        Err(e) => cell.failure = Some(e),
                    }
                }
            }
            cells.push((p, budget, cell));
        }
    }
    FoldOutput { cells, audits }
}

/// Train on the labeled subset and score the fold's test rows.
fn evaluate(
    ctx: &mut FoldContext<'_>,
    pair: &ReprPair,
    budget: usize,
    chosen: &[usize],
    cfg: &TrainConfig,
) -> Outcome<f64> {
    let corpus = ctx.shared.corpus;
    let labels = corpus.labels(chosen);
    if labels.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateLabels.to_string());
    }
    let labeled_variant = match &pair.classification {
        ReprSpec::Embedding(tag) if !ctx.shared.manifest.contains_key(tag) => {
            tag.parse::<Variant>().ok().filter(|v| v.needs_labels())
        }
        _ => None,
    };
    let owned;
    let split = match labeled_variant {
        Some(v) => {
            let name = format!("{v}_b{budget}_{}", file_safe(&pair.selection));
            owned = ctx.sidecar(v, chosen, &name)?;
            &owned
        }
        None => ctx.features(&pair.classification)?,
    };
    let x = split.pool.select_ids(chosen).map_err(|e| e.to_string())?;
    let model = train(&x, &labels, cfg).map_err(|e| e.to_string())?;
    let predicted = predict(&model, &split.test).map_err(|e| e.to_string())?;
    let truth = corpus.labels(split.test.ids());
    macro_f1(&truth, &predicted).map_err(|e| e.to_string())
}

/// Cross-validated run of every representation pair and budget in `spec`.
///
/// Per fold, representations are fitted on the pool, one selection scan runs at
/// the largest budget and smaller budgets take its prefixes. Only the labels of
/// the selected ids are read before evaluation. Failing cells are recorded and
/// never stop the rest of the run.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_pairs(spec, spec.resolved_pairs())
}

/// LSI dimension sweep: every selection representation of `spec` paired with
/// `lsi(d)` classification for each `d`, plus raw BoW as the uncompressed reference.
pub fn sweep_lsi_dims(spec: &ExperimentSpec, dims: &[usize]) -> Result<ExperimentReport> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one dimension".into()));
    }
    let mut selections: Vec<ReprSpec> = Vec::new();
    for p in spec.resolved_pairs() {
        if !selections.contains(&p.selection) {
            selections.push(p.selection);
        }
    }
    let mut pairs = Vec::new();
    for sel in &selections {
        for cls in dims.iter().map(|&d| ReprSpec::Lsi(d)).chain([ReprSpec::Bow]) {
            let pair = ReprPair {
                selection: sel.clone(),
                classification: cls,
            };
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    run_pairs(spec, pairs)
}

fn run_pairs(spec: &ExperimentSpec, pairs: Vec<ReprPair>) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut checked = spec.clone();
    checked.selection_repr = None;
    checked.classification_repr = None;
    checked.pairs = pairs.clone();
    checked.validate()?;

    let corpus = load_corpus(&spec.corpus, spec.corpus_format())?;
    let n_folds = spec.n_folds.unwrap_or_else(|| default_n_folds(corpus.len()));
    let plan = make_folds(&corpus, n_folds, spec.seed)?;

    let mut manifest = BTreeMap::new();
    for pair in &pairs {
        for repr in [&pair.selection, &pair.classification] {
            if let ReprSpec::Embedding(tag) = repr {
                if let Some(path) = spec.embeddings.get(tag) {
                    manifest
                        .entry(tag.clone())
                        .or_insert_with(|| load_manifest_entry(path, corpus.len()));
                }
            }
        }
    }
    let shared = Shared {
        spec,
        corpus: &corpus,
        dataset: spec.dataset_name(),
        manifest,
    };

    let splits = (0..n_folds)
        .map(|f| fold_split(&corpus, &plan, f))
        .collect::<Result<Vec<_>>>()?;
    let outputs: Vec<FoldOutput> = splits
        .into_par_iter()
        .enumerate()
        .map(|(fold, (pool, test))| {
            log::info!("fold {fold}: {} pool, {} test", pool.len(), test.len());
            run_fold(&shared, &pairs, pool, test, fold)
        })
        .collect();

    let mut keyed = BTreeMap::new();
    let mut audits = BTreeMap::new();
    for out in outputs {
        for (p, budget, cell) in out.cells {
            keyed.insert((p, budget, cell.fold), cell);
        }
        for a in out.audits {
            let s = pairs.iter().position(|p| p.selection == a.selection).unwrap_or(0);
            audits.insert((a.fold, s), a);
        }
    }
    let cells: Vec<Cell> = keyed.into_values().collect();
    let (aggregates, comparisons) = summarize(&pairs, &spec.budgets, &cells);
    Ok(ExperimentReport {
        dataset: shared.dataset,
        n_folds,
        seed: spec.seed,
        budgets: spec.budgets.clone(),
        pairs,
        cells,
        aggregates,
        comparisons,
        selections: audits.into_values().collect(),
        runtime: RuntimeInfo {
            version: env!("CARGO_PKG_VERSION").into(),
            threads: rayon::current_num_threads(),
            elapsed_secs: started.elapsed().as_secs_f64(),
        },
    })
}

fn load_manifest_entry(path: &PathBuf, n_docs: usize) -> Outcome<FeatureMatrix> {
    let m = load_embeddings(path).map_err(|e| e.to_string())?;
    if m.ids().iter().any(|&id| id >= n_docs) {
        return Err(format!("{} has ids outside the corpus", path.display()));
    }
    Ok(m)
}
