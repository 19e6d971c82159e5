//! Write class-clustered toy embeddings for a labeled corpus as DVEC, then read them back.
//!
//! ```text
//! cargo run --example toy_embeddings -- data/synthetic_400.jsonl toy.dvec [dims] [noise]
//! ```

use alcs::corpus::{load_corpus, CorpusFormat};
use alcs::harness::synthetic::toy_embeddings;
use alcs::representations::{load_embeddings, save_embeddings};

fn main() -> alcs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let corpus_path = args
        .first()
        .map(String::as_str)
        .unwrap_or("crates/core/data/synthetic_400.jsonl");
    let out = args.get(1).map(String::as_str).unwrap_or("toy.dvec");
    let dims = args.get(2).map_or(16, |d| d.parse().expect("dims must be an integer"));
    let noise = args.get(3).map_or(0.15, |n| n.parse().expect("noise must be a number"));

    let corpus = load_corpus(corpus_path, CorpusFormat::Jsonl)?;
    let labels: Vec<usize> = corpus.documents().iter().map(|d| d.label).collect();
    let matrix = toy_embeddings(&labels, dims, noise, 11)?;
    save_embeddings(&matrix, out)?;

    let back = load_embeddings(out)?;
    println!(
        "wrote {} x {} embeddings to {out}; reloaded with ids {:?}..",
        back.n_rows(),
        back.n_cols(),
        &back.ids()[..3.min(back.n_rows())]
    );
    Ok(())
}
