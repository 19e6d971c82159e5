//! TF-IDF and LSI on a corpus: vocabulary size, leading singular values and
//! the nearest neighbors of a document in both spaces.
//!
//! ```text
//! cargo run --example lsi_topics -- [corpus.jsonl] [d]
//! ```

use alcs::corpus::{load_corpus, CorpusFormat};
use alcs::representations::{fit_vocabulary, lsi_fit, lsi_project, similarity_view, tfidf, DEFAULT_MIN_DF};
use alcs::selection::knn_topk;

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_400.jsonl").into());
    let d: usize = args.next().map_or(16, |s| s.parse().expect("d must be an integer"));

    let corpus = load_corpus(&path, CorpusFormat::Jsonl)?;
    let ids: Vec<usize> = (0..corpus.len()).collect();
    let texts: Vec<&str> = corpus.texts(&ids).collect();
    let vocab = fit_vocabulary(&texts, DEFAULT_MIN_DF)?;
    let bow = tfidf(&texts, &vocab);
    println!(
        "{} documents, {} terms, {} nonzeros",
        bow.n_rows(),
        vocab.len(),
        match bow.storage() {
            alcs::representations::Storage::Sparse(m) => m.nnz(),
            alcs::representations::Storage::Dense(m) => m.data().len(),
        }
    );

    let model = lsi_fit(&bow, d)?;
    let sv: Vec<String> = model
        .singular_values()
        .iter()
        .take(8)
        .map(|s| format!("{s:.3}"))
        .collect();
    println!(
        "LSI d={d}: {} Lanczos steps, leading singular values {}",
        model.iterations(),
        sv.join(" ")
    );

    let latent = lsi_project(&model, &bow)?;
    let names = corpus.label_names();
    for (title, view) in [("bow", similarity_view(&bow)), ("lsi", similarity_view(&latent))] {
        let (nbrs, sims) = knn_topk(&view, 0, 5)?;
        let shown: Vec<String> = nbrs
            .iter()
            .zip(&sims)
            .map(|(&j, s)| format!("{j}:{}({s:.2})", names[corpus.documents()[j].label]))
            .collect();
        println!(
            "{title:>4} neighbors of doc 0 ({}): {}",
            names[corpus.documents()[0].label],
            shown.join(" ")
        );
    }
    Ok(())
}
