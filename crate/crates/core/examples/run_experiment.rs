//! Cross-validated experiment from a JSON spec, written as CSV and JSON.
//!
//! ```text
//! cargo run --release --example run_experiment -- [spec.json] [out_dir]
//! ```

use alcs::harness::{emit_report, run_experiment, ExperimentSpec, ReportFormat};

fn main() -> alcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec_path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_400.spec.json").into());
    let out_dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let spec = ExperimentSpec::from_file(&spec_path)?;
    let report = run_experiment(&spec)?;
    println!(
        "{}: {} folds, {} cells",
        report.dataset,
        report.n_folds,
        report.cells.len()
    );
    for agg in &report.aggregates {
        match (agg.mean, agg.ci_lower, agg.ci_upper) {
            (Some(m), Some(lo), Some(hi)) => {
                println!(
                    "  budget {:>4}  {:<36} {m:.4} [{lo:.4}, {hi:.4}]",
                    agg.budget,
                    agg.pair.to_string()
                )
            }
            _ => println!(
                "  budget {:>4}  {:<36} {} failed",
                agg.budget,
                agg.pair.to_string(),
                agg.n_failed
            ),
        }
    }
    for cmp in report.comparisons.iter().filter(|c| c.significant) {
        println!(
            "  budget {:>4}  {} vs {}: p = {:.4}",
            cmp.budget,
            cmp.a,
            cmp.b,
            cmp.p_value.unwrap_or(1.0)
        );
    }
    emit_report(&report, out_dir.join("report.csv"), ReportFormat::Csv)?;
    emit_report(&report, out_dir.join("report.json"), ReportFormat::Json)?;
    println!("wrote report.csv and report.json to {}", out_dir.display());
    Ok(())
}
