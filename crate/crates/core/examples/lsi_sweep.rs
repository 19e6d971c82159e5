//! Classification quality as a function of the LSI dimension, with raw BoW as
//! the uncompressed reference.
//!
//! ```text
//! cargo run --release --example lsi_sweep -- [spec.json] [d1,d2,...]
//! ```

use alcs::harness::{sweep_lsi_dims, ExperimentSpec, ReprSpec};

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec_path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_400.spec.json").into());
    let dims: Vec<usize> = args
        .next()
        .unwrap_or_else(|| "4,16,64,256".into())
        .split(',')
        .map(|d| d.trim().parse().expect("dimensions must be integers"))
        .collect();

    let mut spec = ExperimentSpec::from_file(&spec_path)?;
    spec.pairs.clear();
    spec.selection_repr = Some(ReprSpec::Bow);
    let report = sweep_lsi_dims(&spec, &dims)?;
    for agg in &report.aggregates {
        let d = match agg.pair.classification {
            ReprSpec::Lsi(d) => d.to_string(),
            _ => "all".into(),
        };
        let mean = agg
            .mean
            .map_or_else(|| format!("{} folds failed", agg.n_failed), |m| format!("{m:.4}"));
        println!("budget {:>4}  d={d:<5} {mean}", agg.budget);
    }
    Ok(())
}
