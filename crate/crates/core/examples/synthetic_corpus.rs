//! Generate a seeded topic corpus as JSONL.
//!
//! ```text
//! cargo run --example synthetic_corpus -- out.jsonl [n_docs] [seed]
//! ```

use alcs::harness::synthetic::{topic_corpus, write_jsonl, TopicCorpusConfig};

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synthetic.jsonl".into());
    let mut cfg = TopicCorpusConfig::default();
    if let Some(n) = args.next() {
        cfg.n_docs = n.parse().expect("n_docs must be an integer");
    }
    if let Some(s) = args.next() {
        cfg.seed = s.parse().expect("seed must be an integer");
    }
    let docs = topic_corpus(&cfg)?;
    write_jsonl(&docs, &out)?;
    println!("wrote {} documents in {} classes to {out}", docs.len(), cfg.n_classes);
    Ok(())
}
