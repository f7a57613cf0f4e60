#![allow(dead_code)]

use lafter_core::{AdjacencyMatrix, BinaryMatrix, ModelState, ObservationMask, RealMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_binary(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> BinaryMatrix {
    let data = (0..rows * cols).map(|_| rng.random_bool(p) as u8).collect();
    BinaryMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> RealMatrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    RealMatrix::from_vec(rows, cols, data).unwrap()
}

/// A random graph, a random off-diagonal mask observing roughly `p_obs` of
/// the entries, and a random model state.
pub struct Instance {
    pub y: AdjacencyMatrix,
    pub mask: ObservationMask,
    pub state: ModelState,
}

pub fn random_instance(seed: u64, n: usize, k: usize, p_obs: f64) -> Instance {
    let mut r = rng(seed);
    let y = AdjacencyMatrix::new(random_binary(&mut r, n, n, 0.4), false).unwrap();
    let mut mask = ObservationMask::empty(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && r.random_bool(p_obs) {
                mask.set(i, j, true).unwrap();
            }
        }
    }
    let z = random_binary(&mut r, n, k, 0.5);
    let w = random_real(&mut r, k, k, 2.0);
    let lambda = r.random_range(0.1..2.0);
    let state = ModelState::new(z, w, lambda).unwrap();
    Instance { y, mask, state }
}

/// Objective recomputed from scratch with plain loops, independent of the
/// library's caches and stable helpers. Only meant for moderate logits.
pub fn naive_objective(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    z: &BinaryMatrix,
    w: &RealMatrix,
    lambda: f64,
) -> f64 {
    let n = z.rows();
    let k = z.cols();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !mask.is_observed(i, j) {
                continue;
            }
            let mut a = 0.0;
            for p in 0..k {
                for q in 0..k {
                    a += z.get(i, p) as f64 * w.get(p, q) * z.get(j, q) as f64;
                }
            }
            let prob = 1.0 / (1.0 + (-a).exp());
            total -= if y.get(i, j) == 1 { prob.ln() } else { (1.0 - prob).ln() };
        }
    }
    total + k as f64 * lambda * lambda
}

pub fn naive_state_objective(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> f64 {
    naive_objective(y, mask, state.z(), state.w(), state.lambda())
}

pub fn flipped(z: &BinaryMatrix, n: usize, k: usize) -> BinaryMatrix {
    let mut out = z.clone();
    out.set(n, k, 1 - z.get(n, k));
    out
}

/// Largest objective decrease available from any single flip of `Z`,
/// found by full recomputation. Positive means some flip helps.
pub fn best_single_flip_gain(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> f64 {
    let base = naive_state_objective(y, mask, state);
    let mut best = f64::NEG_INFINITY;
    for n in 0..state.n() {
        for k in 0..state.k_plus() {
            let z = flipped(state.z(), n, k);
            let q = naive_objective(y, mask, &z, state.w(), state.lambda());
            best = best.max(base - q);
        }
    }
    best
}

pub fn assert_non_increasing(trace: &[f64], start: f64) {
    let mut prev = start;
    for (t, &q) in trace.iter().enumerate() {
        assert!(q <= prev + 1e-9, "objective rose at iteration {t}: {prev} -> {q}");
        prev = q;
    }
}

/// Two disjoint cliques of `size` nodes each, no edges across.
pub fn two_cliques(size: usize) -> AdjacencyMatrix {
    let n = 2 * size;
    let mut y = AdjacencyMatrix::zeros(n).unwrap();
    for i in 0..n {
        for j in 0..n {
            if i != j && i / size == j / size {
                y.set(i, j, true).unwrap();
            }
        }
    }
    y
}
