mod common;

use alcs::representations::similarity_view;
use alcs::selection::{density_all, diversity, dwds_select, knn_topk, SelectionConfig};
use common::*;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn angles(deg: &[f64]) -> Vec<Vec<f64>> {
    deg.iter()
        .map(|d| vec![d.to_radians().cos(), d.to_radians().sin()])
        .collect()
}

fn select(rows: &[Vec<f64>], budget: usize, k: usize, dist_min: f64) -> alcs::selection::SelectionResult {
    let view = similarity_view(&dense(rows));
    dwds_select(&view, &SelectionConfig::new(budget, k, dist_min).unwrap()).unwrap()
}

#[test]
fn density_worked_example() {
    let rows = angles(&[0.0, 10.0, 20.0, 90.0]);
    let d = density_all(&similarity_view(&dense(&rows)), 2).unwrap();
    let expected = (10f64.to_radians().cos() + 20f64.to_radians().cos()) / 2.0;
    assert!((d[0] - expected).abs() < 1e-12);
    assert!((d[0] - 0.96225).abs() < 1e-5);
    let oracle = brute_density(&cosine_table(&rows), 2);
    for (a, b) in d.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn knn_matches_full_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = gaussian_rows(&mut rng, 50, 8)
        .into_iter()
        .map(|r| {
            let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let sim = cosine_table(&rows);
    let view = similarity_view(&dense(&rows));
    for i in 0..rows.len() {
        let (ids, sims) = knn_topk(&view, i, 5).unwrap();
        assert_eq!(ids, brute_knn(&sim, i, 5));
        assert!(sims.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn two_cluster_pick_order() {
    let rows = angles(&[0.0, 2.0, 4.0, 90.0, 92.0]);
    let r = select(&rows, 2, 2, 0.5);
    assert_eq!(r.selected[0], 1);
    assert!(r.selected[1] == 3 || r.selected[1] == 4);
    assert_eq!(r.selected, literal_dwds(&rows, 2, 2, 0.5).0);
}

#[test]
fn duplicates_exhaust_the_pool() {
    let rows = vec![vec![1.0, 2.0]; 3];
    let r = select(&rows, 3, 2, 0.5);
    assert_eq!(r.selected, vec![0]);
    assert!(r.exhausted);
}

#[test]
fn zero_threshold_is_density_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows = gaussian_rows(&mut rng, 40, 6);
    let r = select(&rows, 10, 3, 0.0);
    let dens = brute_density(&cosine_table(&rows), 3);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| dens[b].partial_cmp(&dens[a]).unwrap().then(a.cmp(&b)));
    assert_eq!(r.selected, order[..10]);
}

#[test]
fn diversity_examples() {
    let rows = angles(&[0.0, 60.0]);
    let view = similarity_view(&dense(&rows));
    assert_eq!(diversity(&view, 0, &[]), 1.0);
    assert!((diversity(&view, 1, &[0]) - 0.5).abs() < 1e-12);
    assert_eq!(diversity(&view, 0, &[0]), 0.0);
}

#[test]
fn audit_records_every_scanned_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows = gaussian_rows(&mut rng, 60, 5);
    let r = select(&rows, 6, 4, 0.6);
    let accepted: Vec<usize> = r.audit.iter().filter(|a| a.accepted).map(|a| a.id).collect();
    assert_eq!(accepted, r.selected);
    for a in r.audit.iter().filter(|a| a.accepted).skip(1) {
        assert!(a.diversity >= 0.6);
    }
    let dens: Vec<f64> = r.audit.iter().map(|a| a.density).collect();
    assert!(dens.windows(2).all(|w| w[0] >= w[1]));
    let json = serde_json::to_value(&r).unwrap();
    assert!(json.get("densities").is_none());
    assert!(json["audit"][0].get("diversity").is_some());
}

#[test]
fn identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rows = gaussian_rows(&mut rng, 250, 12);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| select(&rows, 30, 7, 0.4))
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert_eq!(
        one.densities.iter().map(|d| d.to_bits()).collect::<Vec<_>>(),
        four.densities.iter().map(|d| d.to_bits()).collect::<Vec<_>>()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matches_literal_loop(seed in 0u64..10_000, n in 2usize..80, dims in 1usize..10, k in 1usize..=10,
                            step in 0usize..10, budget_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_rows(&mut rng, n, dims);
        let budget = 1 + (budget_frac * n as f64) as usize;
        let dist_min = step as f64 / 10.0;
        let r = select(&rows, budget, k, dist_min);
        let (oracle, exhausted) = literal_dwds(&rows, k, budget, dist_min);
        prop_assert_eq!(&r.selected, &oracle);
        prop_assert_eq!(r.exhausted, exhausted);
    }

    #[test]
    fn scale_invariant(seed in 0u64..10_000, scale in 0.001f64..1000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_rows(&mut rng, 40, 4);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
        prop_assert_eq!(select(&rows, 8, 3, 0.3).selected, select(&scaled, 8, 3, 0.3).selected);
    }

    #[test]
    fn budget_respected(seed in 0u64..10_000, budget in 1usize..40, step in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_rows(&mut rng, 30, 3);
        let r = select(&rows, budget, 4, step as f64 / 10.0);
        prop_assert!(r.selected.len() <= budget);
        prop_assert_eq!(r.exhausted, r.selected.len() < budget);
        let mut unique = r.selected.clone();
        unique.sort_unstable();
        unique.dedup();
        prop_assert_eq!(unique.len(), r.selected.len());
    }
}
