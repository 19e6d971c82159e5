//! The embedding sidecar contract, end to end: the harness writes a request,
//! launches a command, and reads back a DVEC matrix plus a `.done` reply.
//!
//! This example plays both roles. Launched normally it runs an experiment whose
//! classifier uses `embedding(dotcal)`; the harness then re-launches this same
//! binary with `--serve <request.json>`, which answers with hashed bag-of-words
//! vectors in place of a fine-tuned language model.
//!
//! ```text
//! cargo run --example sidecar_protocol
//! ```

use std::path::Path;

use alcs::harness::synthetic::{topic_corpus, write_jsonl, TopicCorpusConfig};
use alcs::harness::{run_experiment, ExperimentSpec, ReprPair, ReprSpec, SidecarConfig};
use alcs::representations::{save_embeddings, DenseMatrix, FeatureMatrix, MatrixKind};
use serde_json::Value;

const DIMS: usize = 64;

fn embed(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; DIMS];
    for tok in text.split_whitespace() {
        let h = tok
            .bytes()
            .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
        v[(h % DIMS as u64) as usize] += 1.0;
    }
    v
}

fn serve(request_path: &Path) -> alcs::Result<()> {
    let request: Value =
        serde_json::from_slice(&std::fs::read(request_path).map_err(|e| alcs::Error::io(request_path, e))?)?;
    let texts_path = request["pool_texts"].as_str().unwrap_or_default();
    let texts = std::fs::read_to_string(texts_path).map_err(|e| alcs::Error::io(texts_path, e))?;
    let mut rows = Vec::new();
    for line in texts.lines() {
        let rec: Value = serde_json::from_str(line)?;
        rows.push(embed(rec["text"].as_str().unwrap_or_default()));
    }
    let out = request["out"].as_str().unwrap_or_default();
    save_embeddings(
        &FeatureMatrix::dense(MatrixKind::Embedding, DenseMatrix::from_rows(&rows)?),
        out,
    )?;

    let mut reply = request.clone();
    reply["n_rows"] = rows.len().into();
    reply["n_cols"] = DIMS.into();
    reply["truncated"] = 0.into();
    reply["steps"] = serde_json::json!(["mlm", "atc", "embed"]);
    let done = format!("{}.done", request_path.display());
    std::fs::write(&done, reply.to_string()).map_err(|e| alcs::Error::io(&done, e))
}

fn main() -> alcs::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    if let Some(pos) = args.iter().position(|a| a == "--serve") {
        return serve(Path::new(&args[pos + 1]));
    }

    let work = std::env::temp_dir().join(format!("alcs-sidecar-example-{}", std::process::id()));
    std::fs::create_dir_all(&work).map_err(|e| alcs::Error::io(&work, e))?;
    let corpus = work.join("corpus.jsonl");
    write_jsonl(
        &topic_corpus(&TopicCorpusConfig {
            n_docs: 120,
            ..Default::default()
        })?,
        &corpus,
    )?;

    let mut spec = ExperimentSpec::new(&corpus);
    spec.n_folds = Some(3);
    spec.budgets = vec![8, 16];
    spec.pairs = vec![ReprPair {
        selection: ReprSpec::Bow,
        classification: "embedding(dotcal)".parse()?,
    }];
    let mut sidecar = SidecarConfig::new(vec![args[0].clone(), "--serve".into()], "toy-checkpoint");
    sidecar.work_dir = Some(work.join("sidecar"));
    spec.sidecar = Some(sidecar);

    let report = run_experiment(&spec)?;
    for cell in &report.cells {
        let score = cell
            .macro_f1
            .map_or_else(|| cell.failure.clone().unwrap_or_default(), |f| format!("{f:.4}"));
        println!("fold {} budget {:>2}: {score}", cell.fold, cell.budget);
    }
    let request = work
        .join("sidecar")
        .join(&report.dataset)
        .join("fold0")
        .join("dotcal_b8_bow.request.json");
    println!(
        "\nrequest written for fold 0, budget 8:\n{}",
        std::fs::read_to_string(&request).unwrap_or_default()
    );
    std::fs::remove_dir_all(&work).ok();
    Ok(())
}
