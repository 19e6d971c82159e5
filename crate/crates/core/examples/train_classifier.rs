//! Label a DWDS selection, train the linear classifier on it and score the rest
//! of the corpus. The model is saved and reloaded on the way.
//!
//! ```text
//! cargo run --example train_classifier -- [corpus.jsonl] [budget]
//! ```

use alcs::classifier::{load_model, predict, save_model, train, TrainConfig};
use alcs::corpus::{load_corpus, CorpusFormat};
use alcs::evaluation::{macro_f1, ConfusionMatrix};
use alcs::representations::{fit_vocabulary, similarity_view, tfidf, DEFAULT_MIN_DF};
use alcs::selection::{dwds_select, SelectionConfig, DEFAULT_K};

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_400.jsonl").into());
    let budget: usize = args
        .next()
        .map_or(16, |s| s.parse().expect("budget must be an integer"));

    let corpus = load_corpus(&path, CorpusFormat::Jsonl)?;
    let ids: Vec<usize> = (0..corpus.len()).collect();
    let texts: Vec<&str> = corpus.texts(&ids).collect();
    let x = tfidf(&texts, &fit_vocabulary(&texts, DEFAULT_MIN_DF)?);

    let selected = dwds_select(&similarity_view(&x), &SelectionConfig::new(budget, DEFAULT_K, 0.7)?)?.selected;
    let model = train(
        &x.select_rows(&selected)?,
        &corpus.labels(&selected),
        &TrainConfig::default(),
    )?;
    for (c, t) in model.classes().iter().zip(model.trace()) {
        println!(
            "class {:<10} {} epochs, objective {:.4} -> {:.4}",
            corpus.label_names()[*c],
            t.epochs_run,
            t.objectives.first().copied().unwrap_or(0.0),
            t.objectives.last().copied().unwrap_or(0.0)
        );
    }

    let file = std::env::temp_dir().join("alcs-example.model");
    save_model(&model, &file)?;
    let model = load_model(&file)?;

    let rest: Vec<usize> = ids.iter().copied().filter(|i| !selected.contains(i)).collect();
    let truth = corpus.labels(&rest);
    let predicted = predict(&model, &x.select_rows(&rest)?)?;
    let cm = ConfusionMatrix::new(&truth, &predicted)?;
    println!(
        "trained on {} labels, macro-F1 on the other {}: {:.4}",
        selected.len(),
        rest.len(),
        macro_f1(&truth, &predicted)?
    );
    for t in 0..cm.n_classes() {
        let row: Vec<String> = (0..cm.n_classes()).map(|p| format!("{:>4}", cm.get(t, p))).collect();
        println!("  {:<10}{}", corpus.label_names()[t], row.join(""));
    }
    Ok(())
}
