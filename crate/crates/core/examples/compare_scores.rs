//! Fold-level statistics: macro-F1 of two systems, 95% intervals and a paired
//! Wilcoxon signed-rank test between them.
//!
//! ```text
//! cargo run --example compare_scores
//! ```

use alcs::evaluation::{macro_f1, mean_ci, wilcoxon_paired};

fn main() -> alcs::Result<()> {
    let truth = [0, 0, 1, 1];
    println!(
        "macro-F1 of [A,B,B,B] against [A,A,B,B]: {:.4}",
        macro_f1(&truth, &[0, 1, 1, 1])?
    );

    let system_a = [0.71, 0.69, 0.74, 0.70, 0.72, 0.75, 0.68, 0.73, 0.71, 0.74];
    let system_b = [0.66, 0.68, 0.70, 0.64, 0.69, 0.71, 0.67, 0.65, 0.70, 0.69];
    for (name, scores) in [("a", &system_a), ("b", &system_b)] {
        let ci = mean_ci(scores, 0.95)?;
        println!(
            "system {name}: mean {:.4}, 95% CI [{:.4}, {:.4}]",
            ci.mean, ci.lower, ci.upper
        );
    }
    let test = wilcoxon_paired(&system_a, &system_b)?;
    println!(
        "Wilcoxon W={} over {} pairs ({:?}): p = {:.5}, {}",
        test.statistic,
        test.n_effective,
        test.method,
        test.p_value,
        if test.significant() {
            "significant"
        } else {
            "not significant"
        }
    );
    Ok(())
}
