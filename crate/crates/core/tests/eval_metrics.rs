use lafter_core::generator::{block_interactions, planted_blocks, sample_links};
use lafter_core::*;
use proptest::prelude::*;

fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (s_pos, _) in scores.iter().zip(labels).filter(|(_, &l)| l == 1) {
        for (s_neg, _) in scores.iter().zip(labels).filter(|(_, &l)| l == 0) {
            pairs += 1.0;
            if s_pos > s_neg {
                credit += 1.0;
            } else if s_pos == s_neg {
                credit += 0.5;
            }
        }
    }
    credit / pairs
}

fn auc(scores: &[f64], labels: &[u8]) -> f64 {
    auc_roc(&ScoredPairs::from_scores(scores, labels).unwrap()).unwrap()
}

fn scores_and_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..200).prop_flat_map(|n| {
        // A coarse score grid makes ties common.
        let scores = prop::collection::vec((0u32..=20).prop_map(|s| s as f64 / 20.0), n);
        let labels = prop::collection::vec(0u8..=1, n).prop_filter("both classes", |l| l.contains(&0) && l.contains(&1));
        (scores, labels)
    })
}

proptest! {
    #[test]
    fn auc_matches_pairwise_enumeration((scores, labels) in scores_and_labels()) {
        let fast = auc(&scores, &labels);
        prop_assert!((fast - brute_force_auc(&scores, &labels)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&fast));
    }

    #[test]
    fn auc_ignores_increasing_transforms((scores, labels) in scores_and_labels()) {
        let base = auc(&scores, &labels);
        let cubed: Vec<f64> = scores.iter().map(|s| s * s * s).collect();
        // Clamp away from 0 and 1 so the logit stays finite.
        let logit: Vec<f64> = scores.iter().map(|s| { let p = 0.01 + 0.98 * s; (p / (1.0 - p)).ln() }).collect();
        prop_assert!((auc(&cubed, &labels) - base).abs() <= 1e-12);
        prop_assert!((auc(&logit, &labels) - base).abs() <= 1e-12);
    }

    #[test]
    fn complementary_labels_sum_to_one((scores, labels) in scores_and_labels()) {
        let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        prop_assert!((auc(&scores, &labels) + auc(&scores, &flipped) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn splits_partition_eligible_entries(n in 2usize..15, frac in 0.05f64..=1.0, seed in 0u64..1000, tie in any::<bool>()) {
        let opts = SplitOptions { tie_symmetric: tie, include_diagonal: false };
        let (train, test) = split_observations_with(n, frac, seed, opts).unwrap();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.count() + test.count(), n * n - n);
        prop_assert!(!train.has_diagonal() && !test.has_diagonal());
        if tie {
            prop_assert!(train.is_symmetric() && test.is_symmetric());
        }
        let units = if tie { (n * n - n) / 2 } else { n * n - n };
        let expected = (frac * units as f64 + 1e-9).floor() as usize;
        prop_assert_eq!(train.count(), if tie { 2 * expected } else { expected });
    }
}

#[test]
fn auc_worked_examples() {
    assert_eq!(auc(&[0.9, 0.1], &[1, 0]), 1.0);
    assert_eq!(auc(&[0.3; 6], &[1, 0, 1, 0, 0, 1]), 0.5);
    assert_eq!(auc(&[0.8, 0.7, 0.6, 0.5], &[1, 0, 1, 0]), 0.75);
}

#[test]
fn predictions_agree_with_link_probability() {
    let z = BinaryMatrix::from_rows(&[vec![1, 0], vec![1, 1], vec![0, 1]], 2).unwrap();
    let w = RealMatrix::from_rows(&[vec![0.4, -1.0], vec![2.0, 0.1]], 2).unwrap();
    let state = ModelState::new(z, w, 0.5).unwrap();
    let pairs = [(0, 1), (2, 0), (1, 1)];
    let preds = predict_links(&state, &pairs).unwrap();
    for (&(i, j), p) in pairs.iter().zip(preds) {
        assert_eq!(p, link_probability(&state, i, j).unwrap());
    }
    assert!(predict_links(&state, &[]).unwrap().is_empty());
    assert!(predict_links(&state, &[(0, 3)]).is_err());
}

fn planted_two_blocks(seed: u64) -> AdjacencyMatrix {
    let z = planted_blocks(40, 2).unwrap();
    let w = block_interactions(2, 6.0, -6.0);
    sample_links(&z, &w, seed).unwrap()
}

#[test]
fn planted_blocks_are_predicted_well() {
    let y = planted_two_blocks(1);
    let (train, test) = split_observations(&y, 0.8, 1, y.symmetric_hint()).unwrap();
    let config = FitConfig { seed: 1, ..FitConfig::default() };
    let (score, report) = evaluate_split(&y, &train, &test, &config).unwrap();
    assert!(score > 0.95, "auc {score}, K+ {}", report.final_state.k_plus());
    let (again, _) = evaluate_split(&y, &train, &test, &config).unwrap();
    assert_eq!(score.to_bits(), again.to_bits());
}

#[test]
fn heavy_penalty_blocks_every_birth() {
    let y = planted_two_blocks(2);
    let (train, test) = split_observations(&y, 0.8, 2, y.symmetric_hint()).unwrap();
    let config = FitConfig { lambda: 1e3, seed: 2, ..FitConfig::default() };
    let (_, report) = evaluate_split(&y, &train, &test, &config).unwrap();
    assert!(report.accepted_births.iter().all(|&b| !b));
    assert!(report.final_state.k_plus() <= config.k_init);
}

#[test]
fn test_entries_never_reach_the_fit() {
    let y = planted_two_blocks(3);
    let (train, test) = split_observations(&y, 0.8, 3, false).unwrap();
    let config = FitConfig { seed: 3, ..FitConfig::default() };
    let reference = fit_with(&y, &train, &config, &NoClock, &mut |_| {}).unwrap();
    let mut scrambled = y.clone();
    for (i, j) in test.entries() {
        scrambled.set(i, j, y.get(i, j) == 0).unwrap();
    }
    let report = fit_with(&scrambled, &train, &config, &NoClock, &mut |_| {}).unwrap();
    assert_eq!(report, reference);
}

#[test]
fn single_lambda_grid_returns_it() {
    let y = planted_two_blocks(4);
    let (train, _) = split_observations(&y, 0.8, 4, false).unwrap();
    let cv = cross_validate_lambda(&y, &train, &[0.7], 3, 4, &FitConfig::default()).unwrap();
    assert_eq!(cv.best_lambda, 0.7);
    assert_eq!(cv.table.len(), 1);
    assert_eq!(cv.table[0].folds_used, 3);
}

#[test]
fn cross_validation_prefers_the_usable_lambda() {
    let y = planted_two_blocks(5);
    let (train, _) = split_observations(&y, 0.8, 5, false).unwrap();
    let config = FitConfig { seed: 5, ..FitConfig::default() };
    let cv = cross_validate_lambda(&y, &train, &[0.5, 1e3], 3, 5, &config).unwrap();
    assert_eq!(cv.best_lambda, 0.5);
    assert!(cv.table[0].mean_auc > cv.table[1].mean_auc);
    let again = cross_validate_lambda(&y, &train, &[0.5, 1e3], 3, 5, &config).unwrap();
    assert_eq!(cv, again);
}

#[test]
fn cross_validation_breaks_ties_toward_small_lambda() {
    // Both penalties reject every birth, and nothing else in a fit depends on
    // lambda, so the two rows tie exactly.
    let y = planted_two_blocks(6);
    let (train, _) = split_observations(&y, 0.8, 6, false).unwrap();
    let config = FitConfig { seed: 6, ..FitConfig::default() };
    let cv = cross_validate_lambda(&y, &train, &[2e3, 1e3], 2, 6, &config).unwrap();
    assert_eq!(cv.table[0].mean_auc, cv.table[1].mean_auc);
    assert_eq!(cv.best_lambda, 1e3);
}
