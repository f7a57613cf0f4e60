mod common;

use common::{naive_state_objective, random_instance, random_real, rng};
use lafter_core::bregman::{bernoulli_bregman, scaled_log_partition};
use lafter_core::numeric::sigmoid;
use lafter_core::*;
use proptest::prelude::*;

fn with_w(state: &ModelState, w: RealMatrix) -> ModelState {
    ModelState::new(state.z().clone(), w, state.lambda()).unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..40 {
        let n = 3 + (seed as usize % 6);
        let k = 1 + (seed as usize % 3);
        let inst = random_instance(seed, n, k, 0.8);
        let grad = nll_gradient_w(&inst.y, &inst.mask, &inst.state).unwrap();
        for p in 0..k {
            for q in 0..k {
                let mut plus = inst.state.w().clone();
                plus.set(p, q, plus.get(p, q) + h);
                let mut minus = inst.state.w().clone();
                minus.set(p, q, minus.get(p, q) - h);
                let f_plus = negative_log_likelihood(&inst.y, &inst.mask, &with_w(&inst.state, plus)).unwrap();
                let f_minus = negative_log_likelihood(&inst.y, &inst.mask, &with_w(&inst.state, minus)).unwrap();
                let fd = (f_plus - f_minus) / (2.0 * h);
                let g = grad.get(p, q);
                // Relative to the entry, with a floor so exactly-zero entries
                // (features nobody carries) compare absolutely.
                let err = (g - fd).abs() / g.abs().max(1.0);
                assert!(err < 1e-5, "seed {seed} entry ({p},{q}): analytic {g}, fd {fd}");
            }
        }
    }
}

#[test]
fn nll_equals_bregman_sum_on_binary_data() {
    for seed in 0..20 {
        let inst = random_instance(100 + seed, 4, 2, 1.0);
        let nll = negative_log_likelihood(&inst.y, &inst.mask, &inst.state).unwrap();
        let mut bregman = 0.0;
        for (i, j) in inst.mask.entries() {
            let p = link_probability(&inst.state, i, j).unwrap();
            bregman += bernoulli_bregman(inst.y.get(i, j) as f64, p).unwrap();
        }
        assert!((nll - bregman).abs() <= 1e-12 * nll.max(1.0), "seed {seed}: {nll} vs {bregman}");
    }
}

#[test]
fn per_entry_loss_equals_divergence_at_binary_points() {
    for &a in &[-12.0, -3.0, -0.5, 0.0, 0.25, 2.0, 9.0] {
        let p = sigmoid(a);
        for y in [0u8, 1] {
            let direct = if y == 1 { -p.ln() } else { -(1.0 - p).ln() };
            let d = bernoulli_bregman(y as f64, p).unwrap();
            assert!((direct - d).abs() < 1e-12, "a={a} y={y}: {direct} vs {d}");
        }
    }
}

#[test]
fn objective_is_convex_in_w() {
    let mut r = rng(7);
    for seed in 0..30 {
        let inst = random_instance(200 + seed, 6, 3, 0.7);
        let w1 = random_real(&mut r, 3, 3, 3.0);
        let w2 = random_real(&mut r, 3, 3, 3.0);
        let s1 = with_w(&inst.state, w1.clone());
        let s2 = with_w(&inst.state, w2.clone());
        let q1 = objective(&inst.y, &inst.mask, &s1).unwrap();
        let q2 = objective(&inst.y, &inst.mask, &s2).unwrap();
        for &t in &[0.25, 0.5, 0.75] {
            let mix: Vec<f64> = w1.as_slice().iter().zip(w2.as_slice()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let mid = with_w(&inst.state, RealMatrix::from_vec(3, 3, mix).unwrap());
            let qm = objective(&inst.y, &inst.mask, &mid).unwrap();
            assert!(qm <= t * q1 + (1.0 - t) * q2 + 1e-9, "seed {seed} t {t}");
        }
    }
}

#[test]
fn scaled_log_partition_derivatives() {
    for &beta in &[0.5, 1.0, 4.0, 25.0] {
        for &eta in &[-3.0, -0.7, 0.0, 1.2, 5.0] {
            let q = sigmoid(eta / beta);
            let h = 1e-6;
            let f = |x: f64| scaled_log_partition(x, beta).unwrap();
            let first = (f(eta + h) - f(eta - h)) / (2.0 * h);
            assert!((first - q).abs() <= 1e-4 * q, "mean at beta {beta} eta {eta}: {first} vs {q}");

            // A wider step keeps cancellation error well below the tolerance.
            let h2 = 1e-3 * beta.max(1.0);
            let second = (f(eta + h2) - 2.0 * f(eta) + f(eta - h2)) / (h2 * h2);
            let var = q * (1.0 - q) / beta;
            assert!((second - var).abs() <= 1e-4 * var, "variance at beta {beta} eta {eta}: {second} vs {var}");
        }
    }
}

#[test]
fn scaled_log_partition_rejects_nonpositive_scale() {
    assert!(scaled_log_partition(1.0, 0.0).is_err());
    assert!(scaled_log_partition(1.0, -2.0).is_err());
}

#[test]
fn saturated_entries_have_negligible_loss() {
    let z = BinaryMatrix::from_rows(&[vec![1, 0], vec![0, 1]], 2).unwrap();
    let w = RealMatrix::from_rows(&[vec![50.0, 50.0], vec![-50.0, 50.0]], 2).unwrap();
    let state = ModelState::new(z, w, 0.5).unwrap();
    let mut y = AdjacencyMatrix::zeros(2).unwrap();
    y.set(0, 1, true).unwrap();
    let mask = ObservationMask::full(2, false);
    let nll = negative_log_likelihood(&y, &mask, &state).unwrap();
    assert!(nll / 2.0 < 1e-20, "{nll}");
}

#[test]
fn objective_without_penalty_is_the_likelihood() {
    for seed in 0..5 {
        let mut inst = random_instance(300 + seed, 5, 2, 0.9);
        inst.state.set_lambda(0.0).unwrap();
        let q = objective(&inst.y, &inst.mask, &inst.state).unwrap();
        let nll = negative_log_likelihood(&inst.y, &inst.mask, &inst.state).unwrap();
        assert_eq!(q, nll);
    }
}

#[test]
fn objective_matches_plain_recomputation() {
    for seed in 0..20 {
        let inst = random_instance(400 + seed, 7, 3, 0.6);
        let q = objective(&inst.y, &inst.mask, &inst.state).unwrap();
        let oracle = naive_state_objective(&inst.y, &inst.mask, &inst.state);
        assert!((q - oracle).abs() < 1e-9 * oracle.max(1.0), "{q} vs {oracle}");
    }
}

proptest! {
    #[test]
    fn transposed_w_swaps_the_pair(seed in 0u64..10_000, n in 2usize..8, k in 1usize..4) {
        let inst = random_instance(seed, n, k, 0.5);
        let t = with_w(&inst.state, inst.state.w().transpose());
        for i in 0..n {
            for j in 0..n {
                let a = link_probability(&inst.state, i, j).unwrap();
                let b = link_probability(&t, j, i).unwrap();
                prop_assert!((a - b).abs() <= 1e-15, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn probabilities_stay_inside_the_unit_interval(seed in 0u64..10_000, scale in 0.1f64..400.0) {
        let mut r = rng(seed);
        let z = common::random_binary(&mut r, 4, 3, 0.7);
        let w = random_real(&mut r, 3, 3, scale);
        let state = ModelState::new(z, w, 1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let p = link_probability(&state, i, j).unwrap();
                prop_assert!((0.0..=1.0).contains(&p) && p.is_finite());
            }
        }
    }

    #[test]
    fn caches_agree_with_definition(seed in 0u64..10_000, n in 1usize..10, k in 0usize..5) {
        let inst = random_instance(seed, n, k, 0.5);
        prop_assert!(inst.state.cache_error() <= 1e-9);
    }
}
