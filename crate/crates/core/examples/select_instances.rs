//! Cold-start selection on an unlabeled pool: which documents DWDS would send
//! to an annotator first, and how many classes they cover.
//!
//! ```text
//! cargo run --example select_instances -- [corpus.jsonl] [budget] [dist_min]
//! ```

use alcs::corpus::{load_corpus, CorpusFormat};
use alcs::representations::{fit_vocabulary, similarity_view, tfidf, DEFAULT_MIN_DF};
use alcs::selection::{dwds_select, SelectionConfig, DEFAULT_K};

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_400.jsonl").into());
    let budget: usize = args.next().map_or(8, |s| s.parse().expect("budget must be an integer"));
    let dist_min: f64 = args
        .next()
        .map_or(0.7, |s| s.parse().expect("dist_min must be a number"));

    let corpus = load_corpus(&path, CorpusFormat::Jsonl)?;
    let ids: Vec<usize> = (0..corpus.len()).collect();
    let texts: Vec<&str> = corpus.texts(&ids).collect();
    let bow = tfidf(&texts, &fit_vocabulary(&texts, DEFAULT_MIN_DF)?);

    let cfg = SelectionConfig::new(budget, DEFAULT_K, dist_min)?;
    let result = dwds_select(&similarity_view(&bow), &cfg)?;
    println!(
        "scanned {} candidates, accepted {} of {budget}{}",
        result.audit.len(),
        result.selected.len(),
        if result.exhausted { " (pool exhausted)" } else { "" }
    );
    for rec in result.audit.iter().filter(|r| r.accepted) {
        println!(
            "  doc {:>4}  density {:.4}  diversity {:.4}",
            rec.id, rec.density, rec.diversity
        );
    }

    // Labels are looked at only now, to see what an annotator would be shown.
    let mut classes = corpus.labels(&result.selected);
    classes.sort_unstable();
    classes.dedup();
    println!("covers {} of {} classes", classes.len(), corpus.n_classes());
    Ok(())
}
