mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use alcs::classifier::{predict, train, TrainConfig};
use alcs::corpus::{fold_split, load_corpus, make_folds, CorpusFormat};
use alcs::evaluation::macro_f1;
use alcs::harness::synthetic::{topic_corpus, write_jsonl, TopicCorpusConfig};
use alcs::harness::{
    emit_report, load_report, run_experiment, sweep_lsi_dims, to_csv, ExperimentSpec, ReportFormat, ReprPair, ReprSpec,
    SidecarConfig, CSV_HEADER,
};
use alcs::representations::{fit_vocabulary, similarity_view, tfidf, DenseMatrix, FeatureMatrix, MatrixKind};
use alcs::selection::{dwds_select, SelectionConfig};
use common::*;
use serde_json::Value;

fn pair(sel: &str, cls: &str) -> ReprPair {
    ReprPair {
        selection: sel.parse().unwrap(),
        classification: cls.parse().unwrap(),
    }
}

fn small_corpus(dir: &Path, n_docs: usize) -> PathBuf {
    let docs = topic_corpus(&TopicCorpusConfig {
        n_docs,
        ..Default::default()
    })
    .unwrap();
    let path = dir.join("small.jsonl");
    write_jsonl(&docs, &path).unwrap();
    path
}

fn bundled_spec() -> ExperimentSpec {
    ExperimentSpec::from_file(data_dir().join("synthetic_400.spec.json")).unwrap()
}

#[test]
fn smaller_budgets_are_prefixes() {
    let mut spec = bundled_spec();
    spec.pairs = vec![pair("bow", "bow")];
    let report = run_experiment(&spec).unwrap();
    let corpus = load_corpus(&spec.corpus, CorpusFormat::Jsonl).unwrap();
    let plan = make_folds(&corpus, report.n_folds, spec.seed).unwrap();
    for audit in &report.selections {
        let (pool, _) = fold_split(&corpus, &plan, audit.fold).unwrap();
        let texts: Vec<&str> = corpus.texts(&pool).collect();
        let vocab = fit_vocabulary(&texts, spec.min_df).unwrap();
        let view = similarity_view(&tfidf(&texts, &vocab).with_ids(pool.clone()).unwrap());
        for &b in &spec.budgets {
            let alone = dwds_select(&view, &SelectionConfig::new(b, 10, 0.7).unwrap()).unwrap();
            let n = b.min(audit.selected.len());
            assert_eq!(alone.selected, audit.selected[..n]);
            let cell = report.cell(audit.fold, b, &spec.pairs[0]).unwrap();
            assert_eq!(cell.n_selected, n);
            assert_eq!(cell.exhausted, n < b);
        }
    }
}

#[test]
fn failing_cells_do_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 60));
    spec.n_folds = Some(3);
    spec.budgets = vec![8];
    spec.pairs = vec![pair("bow", "bow"), pair("bow", "lsi(1000)")];
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.cells.len(), 6);
    for c in &report.cells {
        match c.pair.classification {
            ReprSpec::Lsi(_) => assert!(c.failure.as_deref().unwrap().contains("1000")),
            _ => assert!(c.is_ok(), "{c:?}"),
        }
    }
    let csv = String::from_utf8(to_csv(&report).unwrap()).unwrap();
    assert!(csv.lines().any(|l| l.contains("3 of 3 folds failed")));

    spec.pairs.push(pair("embedding(missing)", "bow"));
    assert!(run_experiment(&spec).is_err());
}

#[test]
fn lsi_rank_failure_names_the_rank() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.jsonl");
    let docs: Vec<_> = (0..30)
        .map(|i| alcs::harness::synthetic::SyntheticDoc {
            text: if i % 2 == 0 {
                "alpha beta gamma".into()
            } else {
                "delta epsilon zeta".into()
            },
            label: if i % 2 == 0 { "a".into() } else { "b".into() },
        })
        .collect();
    write_jsonl(&docs, &path).unwrap();
    let mut spec = ExperimentSpec::new(&path);
    spec.n_folds = Some(2);
    spec.budgets = vec![2];
    spec.selection.dist_min = Some(0.5);
    let report = sweep_lsi_dims(&spec, &[2, 4]).unwrap();
    let by_dim = |d| {
        report
            .cells
            .iter()
            .filter(move |c| c.pair.classification == ReprSpec::Lsi(d))
    };
    assert!(by_dim(2).all(|c| c.is_ok()));
    assert!(by_dim(4).all(|c| c.failure.as_deref().unwrap().contains("exceeds the pool matrix rank 2")));
}

#[test]
fn single_label_selection_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 40));
    spec.n_folds = Some(2);
    spec.budgets = vec![1, 12];
    let report = run_experiment(&spec).unwrap();
    for c in &report.cells {
        if c.budget == 1 {
            assert!(c.failure.as_deref().unwrap().contains("degenerate labels"));
        } else {
            assert!(c.is_ok());
        }
    }
}

#[test]
fn whole_pool_budget_equals_full_training() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_corpus(dir.path(), 48);
    let mut spec = ExperimentSpec::new(&path);
    spec.n_folds = Some(4);
    spec.budgets = vec![100];
    spec.selection.dist_min = Some(0.0);
    let report = run_experiment(&spec).unwrap();
    let corpus = load_corpus(&path, CorpusFormat::Jsonl).unwrap();
    let plan = make_folds(&corpus, 4, spec.seed).unwrap();
    for fold in 0..4 {
        let (pool, test) = fold_split(&corpus, &plan, fold).unwrap();
        let pool_texts: Vec<&str> = corpus.texts(&pool).collect();
        let vocab = fit_vocabulary(&pool_texts, spec.min_df).unwrap();
        let x = tfidf(&pool_texts, &vocab);
        let test_x = tfidf(&corpus.texts(&test).collect::<Vec<_>>(), &vocab);
        let mut order = pool.clone();
        let cell = report.cell(fold, 100, &report.pairs[0]).unwrap();
        assert!(cell.exhausted);
        assert_eq!(cell.n_selected, pool.len());
        // Training order follows the selection, so reorder the pool the same way.
        order.clone_from(&report.selections[fold].selected);
        let pos: Vec<usize> = order
            .iter()
            .map(|id| pool.iter().position(|p| p == id).unwrap())
            .collect();
        let model = train(
            &x.select_rows(&pos).unwrap(),
            &corpus.labels(&order),
            &TrainConfig::default(),
        )
        .unwrap();
        let f1 = macro_f1(&corpus.labels(&test), &predict(&model, &test_x).unwrap()).unwrap();
        assert_eq!(cell.macro_f1, Some(f1));
    }
}

#[test]
fn full_rank_sweep_matches_bow() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 60));
    spec.n_folds = Some(3);
    spec.budgets = vec![8, 16];
    let report = sweep_lsi_dims(&spec, &[40]).unwrap();
    let lsi = pair("bow", "lsi(40)");
    let bow = pair("bow", "bow");
    for fold in 0..3 {
        for b in [8, 16] {
            let a = report.cell(fold, b, &lsi).unwrap().macro_f1.unwrap();
            let r = report.cell(fold, b, &bow).unwrap().macro_f1.unwrap();
            assert!((a - r).abs() < 1e-6, "fold {fold} budget {b}: {a} vs {r}");
        }
    }
}

#[test]
fn report_rows_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 40));
    spec.n_folds = Some(2);
    spec.budgets = vec![8];
    let report = run_experiment(&spec).unwrap();
    let csv = String::from_utf8(to_csv(&report).unwrap()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.iter().filter(|l| l.contains(",cell,")).count(), 2);
    assert_eq!(lines.iter().filter(|l| l.contains(",aggregate,")).count(), 1);
    assert_eq!(lines.len(), 4);

    let json = dir.path().join("r.json");
    emit_report(&report, &json, ReportFormat::Json).unwrap();
    let back = load_report(&json).unwrap();
    assert_eq!(back, report);
    let (aggregates, comparisons) = back.recompute();
    assert_eq!(aggregates, report.aggregates);
    assert_eq!(comparisons, report.comparisons);
}

#[test]
fn comparison_flags_match_enumeration() {
    let mut spec = bundled_spec();
    spec.budgets = vec![8];
    spec.pairs = vec![pair("bow", "bow"), pair("embedding(toy)", "embedding(toy)")];
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.comparisons.len(), 1);
    let cmp = &report.comparisons[0];
    let scores = |p: &ReprPair| -> Vec<f64> {
        (0..report.n_folds)
            .map(|f| report.cell(f, 8, p).unwrap().macro_f1.unwrap())
            .collect()
    };
    let (a, b) = (scores(&cmp.a), scores(&cmp.b));
    let p = wilcoxon_enumerated(&a, &b);
    assert!((cmp.p_value.unwrap() - p).abs() < 1e-12);
    assert_eq!(cmp.significant, p < 0.05);
    let mean = a.iter().zip(&b).map(|(x, y)| x - y).sum::<f64>() / a.len() as f64;
    assert!((cmp.mean_difference.unwrap() - mean).abs() < 1e-12);
}

fn alcs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alcs"))
}

#[test]
fn cli_run_is_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data_dir().join("synthetic_400.spec.json");
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.csv"));
        let status = alcs()
            .args(["--threads", threads, "run", "--spec"])
            .arg(&spec)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn cli_select_and_represent() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = data_dir().join("synthetic_400.jsonl");
    let sel = dir.path().join("selection.json");
    let status = alcs()
        .args([
            "select",
            "--repr",
            "bow",
            "--budget",
            "12",
            "--k",
            "10",
            "--dist-min",
            "0.7",
            "--corpus",
        ])
        .arg(&corpus)
        .arg("--out")
        .arg(&sel)
        .status()
        .unwrap();
    assert!(status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&sel).unwrap()).unwrap();
    assert_eq!(v["selected"].as_array().unwrap().len(), 12);
    assert_eq!(v["exhausted"], false);

    let m = dir.path().join("m.dvec");
    let status = alcs()
        .args(["represent", "--kind", "lsi", "--dims", "24", "--corpus"])
        .arg(&corpus)
        .arg("--out")
        .arg(&m)
        .status()
        .unwrap();
    assert!(status.success());
    let loaded = alcs::representations::load_embeddings(&m).unwrap();
    assert_eq!((loaded.n_rows(), loaded.n_cols()), (400, 24));

    let bad = alcs()
        .args(["represent", "--kind", "lsi", "--corpus"])
        .arg(&corpus)
        .arg("--out")
        .arg(&m)
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--dims"));
}

#[test]
fn cli_sweep_writes_one_axis_per_dim() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let corpus = small_corpus(dir.path(), 60);
    std::fs::write(
        &spec_path,
        serde_json::json!({"corpus": corpus, "n_folds": 2, "budgets": [8], "seed": 3}).to_string(),
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let status = alcs()
        .args(["sweep-lsi", "--dims", "4,8", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    for cls in ["lsi(4)", "lsi(8)", "bow"] {
        assert!(csv.contains(&format!(",aggregate,all,8,bow,{cls},")), "{cls}");
    }
}

/// Embeddings from hashed tokens, so documents sharing a topic land close together.
fn hashed_embedding(text: &str, dims: usize) -> Vec<f64> {
    let mut v = vec![0.0; dims];
    for tok in text.split_whitespace() {
        let h = tok.bytes().fold(1469598103934665603u64, |h, b| {
            (h ^ b as u64).wrapping_mul(1099511628211)
        });
        v[(h % dims as u64) as usize] += 1.0;
    }
    v
}

/// Stand-in for the embedding sidecar. Does nothing unless launched by the harness.
#[test]
fn fake_sidecar_entry() {
    let Ok(request_path) = std::env::var("ALCS_SIDECAR_REQUEST") else {
        return;
    };
    let request: Value = serde_json::from_slice(&std::fs::read(&request_path).unwrap()).unwrap();
    let texts = std::fs::read_to_string(request["pool_texts"].as_str().unwrap()).unwrap();
    let rows: Vec<Vec<f64>> = texts
        .lines()
        .map(|l| {
            let rec: Value = serde_json::from_str(l).unwrap();
            hashed_embedding(rec["text"].as_str().unwrap(), 32)
        })
        .collect();
    let out = request["out"].as_str().unwrap();
    let m = FeatureMatrix::dense(MatrixKind::Embedding, DenseMatrix::from_rows(&rows).unwrap());
    alcs::representations::save_embeddings(&m, out).unwrap();
    let variant = request["variant"].as_str().unwrap();
    let steps: Vec<&str> = match variant {
        "none" => vec!["embed"],
        "mlm_only" => vec!["mlm", "embed"],
        "one_step" => vec!["atc", "embed"],
        _ => vec!["mlm", "atc", "embed"],
    };
    let mut reply = request.clone();
    reply["n_rows"] = rows.len().into();
    reply["n_cols"] = 32.into();
    reply["truncated"] = 0.into();
    reply["steps"] = serde_json::to_value(steps).unwrap();
    std::fs::write(format!("{request_path}.done"), reply.to_string()).unwrap();
}

#[test]
fn sidecar_variants_through_the_harness() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 40));
    spec.n_folds = Some(2);
    spec.budgets = vec![8];
    let exe = std::env::current_exe().unwrap();
    let mut sidecar = SidecarConfig::new(
        vec![
            exe.display().to_string(),
            "--exact".into(),
            "fake_sidecar_entry".into(),
            "--nocapture".into(),
        ],
        "tiny-model",
    );
    sidecar.work_dir = Some(dir.path().join("work"));
    spec.sidecar = Some(sidecar);
    spec.pairs = vec![
        pair("embedding(none)", "embedding(none)"),
        pair("bow", "embedding(mlm_only)"),
        pair("bow", "embedding(dotcal)"),
    ];
    let report = run_experiment(&spec).unwrap();
    for c in &report.cells {
        assert!(c.is_ok(), "{c:?}");
    }
    let fold0 = dir.path().join("work").join(report.dataset.as_str()).join("fold0");
    let reply: Value =
        serde_json::from_slice(&std::fs::read(fold0.join("dotcal_b8_bow.request.json.done")).unwrap()).unwrap();
    let n_selected = report.cell(0, 8, &spec.pairs[2]).unwrap().n_selected;
    assert_eq!(reply["labeled"].as_array().unwrap().len(), n_selected);
    assert_eq!(reply["steps"], serde_json::json!(["mlm", "atc", "embed"]));
    let none: Value = serde_json::from_slice(&std::fs::read(fold0.join("none.request.json")).unwrap()).unwrap();
    assert!(none["labeled"].as_array().unwrap().is_empty());
}

#[test]
fn sidecar_failure_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(small_corpus(dir.path(), 40));
    spec.n_folds = Some(2);
    spec.budgets = vec![8];
    let mut sidecar = SidecarConfig::new(vec!["false".into()], "m");
    sidecar.work_dir = Some(dir.path().join("work"));
    spec.sidecar = Some(sidecar);
    spec.pairs = vec![pair("bow", "bow"), pair("bow", "embedding(one_step)")];
    let report = run_experiment(&spec).unwrap();
    for c in &report.cells {
        if c.pair.classification == ReprSpec::Bow {
            assert!(c.is_ok());
        } else {
            assert!(c.failure.as_deref().unwrap().starts_with("sidecar error"), "{c:?}");
        }
    }
}
