//! Link probabilities, the penalized Bernoulli-logit objective and its
//! gradient with respect to the interaction matrix.
//!
//! The objective minimized throughout the crate is
//!
//! ```text
//! Q(W, Z) = Σ_{(i,j) observed} [ softplus(a_ij) - y_ij · a_ij ] + K⁺ λ²,
//! a_ij    = z_iᵀ W z_j
//! ```
//!
//! where `K⁺` is the number of columns of `Z`. [`ModelState`] carries `Z`,
//! `W`, `λ` and three caches that make single-coordinate changes of `Z`
//! cheap to evaluate: the logit matrix `A = Z W Zᵀ`, `left[j][k] = (W z_j)_k`
//! and `right[i][k] = (z_iᵀ W)_k`.

use alloc::format;

use crate::error::{check_dim, check_index, invalid, Result};
use crate::graph::{AdjacencyMatrix, ObservationMask};
use crate::matrix::{BinaryMatrix, RealMatrix};
use crate::numeric::{logit_loss, sigmoid};

/// Tolerance used when checking that the caches agree with a recomputation.
pub const CACHE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    z: BinaryMatrix,
    w: RealMatrix,
    lambda: f64,
    logits: RealMatrix,
    left: RealMatrix,
    right: RealMatrix,
}

impl ModelState {
    /// Builds a state from `Z` (N×K, binary) and `W` (K×K) and fills the caches.
    pub fn new(z: BinaryMatrix, w: RealMatrix, lambda: f64) -> Result<Self> {
        if !z.is_binary() {
            return Err(invalid("Z entries must be 0 or 1"));
        }
        check_dim("W rows", z.cols(), w.rows())?;
        check_dim("W columns", z.cols(), w.cols())?;
        if !w.all_finite() {
            return Err(invalid("W entries must be finite"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        let n = z.rows();
        let k = z.cols();
        let mut state = ModelState {
            z,
            w,
            lambda,
            logits: RealMatrix::zeros(n, n),
            left: RealMatrix::zeros(n, k),
            right: RealMatrix::zeros(n, k),
        };
        state.rebuild_caches();
        Ok(state)
    }

    /// The empty model: no features, every logit zero.
    pub fn empty(n: usize, lambda: f64) -> Result<Self> {
        Self::new(BinaryMatrix::zeros(n, 0), RealMatrix::zeros(0, 0), lambda)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.z.rows()
    }

    #[inline]
    pub fn k_plus(&self) -> usize {
        self.z.cols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: f64) -> Result<()> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(())
    }

    pub fn z(&self) -> &BinaryMatrix {
        &self.z
    }

    pub fn w(&self) -> &RealMatrix {
        &self.w
    }

    pub fn logits(&self) -> &RealMatrix {
        &self.logits
    }

    pub fn left_cache(&self) -> &RealMatrix {
        &self.left
    }

    pub fn right_cache(&self) -> &RealMatrix {
        &self.right
    }

    #[inline]
    pub fn logit(&self, i: usize, j: usize) -> f64 {
        self.logits.get(i, j)
    }

    /// Recomputes every cache from `Z` and `W`.
    pub fn rebuild_caches(&mut self) {
        let n = self.n();
        let k = self.k_plus();
        for j in 0..n {
            for a in 0..k {
                let mut left = 0.0;
                let mut right = 0.0;
                for b in 0..k {
                    if self.z.get(j, b) == 1 {
                        left += self.w.get(a, b);
                        right += self.w.get(b, a);
                    }
                }
                self.left.set(j, a, left);
                self.right.set(j, a, right);
            }
        }
        for i in 0..n {
            for j in 0..n {
                self.logits.set(i, j, logit_from_left(&self.z, &self.left, i, j));
            }
        }
    }

    /// Largest absolute disagreement between the caches and a full recompute.
    pub fn cache_error(&self) -> f64 {
        let mut fresh = self.clone();
        fresh.rebuild_caches();
        let mut err: f64 = 0.0;
        for (cached, exact) in [
            (&self.logits, &fresh.logits),
            (&self.left, &fresh.left),
            (&self.right, &fresh.right),
        ] {
            for (a, b) in cached.as_slice().iter().zip(exact.as_slice()) {
                err = err.max(libm::fabs(a - b));
            }
        }
        err
    }

    pub fn caches_coherent(&self) -> bool {
        self.cache_error() <= CACHE_TOLERANCE
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&mut BinaryMatrix, &mut RealMatrix, &mut RealMatrix, &mut RealMatrix, &mut RealMatrix) {
        (&mut self.z, &mut self.w, &mut self.logits, &mut self.left, &mut self.right)
    }

    /// Replaces `W` and rebuilds the caches.
    pub fn set_w(&mut self, w: RealMatrix) -> Result<()> {
        check_dim("W rows", self.k_plus(), w.rows())?;
        check_dim("W columns", self.k_plus(), w.cols())?;
        self.w = w;
        self.rebuild_caches();
        Ok(())
    }

    pub(crate) fn set_w_and_logits(&mut self, w: RealMatrix, logits: RealMatrix) {
        self.w = w;
        self.logits = logits;
    }
}

#[inline]
fn logit_from_left(z: &BinaryMatrix, left: &RealMatrix, i: usize, j: usize) -> f64 {
    let zi = z.row(i);
    let lj = left.row(j);
    let mut acc = 0.0;
    for (a, &bit) in zi.iter().enumerate() {
        if bit == 1 {
            acc += lj[a];
        }
    }
    acc
}

/// `z_iᵀ W z_j` evaluated directly from `Z` and `W`, without caches.
pub fn bilinear_logit(z: &BinaryMatrix, w: &RealMatrix, i: usize, j: usize) -> f64 {
    let k = z.cols();
    let mut acc = 0.0;
    for a in 0..k {
        if z.get(i, a) == 0 {
            continue;
        }
        for b in 0..k {
            if z.get(j, b) == 1 {
                acc += w.get(a, b);
            }
        }
    }
    acc
}

/// `p_ij = σ(z_iᵀ W z_j)`.
pub fn link_probability(state: &ModelState, i: usize, j: usize) -> Result<f64> {
    check_index("node", i, state.n())?;
    check_index("node", j, state.n())?;
    Ok(sigmoid(state.logit(i, j)))
}

pub(crate) fn check_problem(y: &AdjacencyMatrix, mask: &ObservationMask, n: usize) -> Result<()> {
    check_dim("adjacency size", n, y.n())?;
    check_dim("mask size", n, mask.n())
}

/// Sum of `softplus(a) - y·a` over the observed entries of a logit matrix.
pub fn nll_from_logits(y: &AdjacencyMatrix, mask: &ObservationMask, logits: &RealMatrix) -> f64 {
    let n = y.n();
    let mut total = 0.0;
    for i in 0..n {
        let row = logits.row(i);
        for j in 0..n {
            if mask.is_observed(i, j) {
                total += logit_loss(row[j], y.get(i, j));
            }
        }
    }
    total
}

/// `-log P(Y | Z, W)` restricted to the observed entries.
pub fn negative_log_likelihood(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &ModelState,
) -> Result<f64> {
    check_problem(y, mask, state.n())?;
    Ok(nll_from_logits(y, mask, state.logits()))
}

#[inline]
pub fn penalty(k_plus: usize, lambda: f64) -> f64 {
    k_plus as f64 * lambda * lambda
}

/// `Q = NLL + K⁺ λ²`.
pub fn objective(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> Result<f64> {
    Ok(negative_log_likelihood(y, mask, state)? + penalty(state.k_plus(), state.lambda()))
}

/// Exact gradient of the negative log-likelihood with respect to `W`:
/// `G = Σ_observed (p_ij - y_ij) z_i z_jᵀ`.
pub fn nll_gradient_w(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &ModelState,
) -> Result<RealMatrix> {
    check_problem(y, mask, state.n())?;
    Ok(gradient_from_logits(y, mask, state.z(), state.logits()))
}

pub(crate) fn gradient_from_logits(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    z: &BinaryMatrix,
    logits: &RealMatrix,
) -> RealMatrix {
    let n = z.rows();
    let k = z.cols();
    let mut grad = RealMatrix::zeros(k, k);
    if k == 0 {
        return grad;
    }
    // rz[b] = Σ_j r_ij z_jb for the current row i
    let mut rz = alloc::vec![0.0; k];
    for i in 0..n {
        if z.row(i).iter().all(|&v| v == 0) {
            continue;
        }
        rz.iter_mut().for_each(|v| *v = 0.0);
        let row = logits.row(i);
        for j in 0..n {
            if !mask.is_observed(i, j) {
                continue;
            }
            let r = sigmoid(row[j]) - y.get(i, j) as f64;
            for (b, &bit) in z.row(j).iter().enumerate() {
                if bit == 1 {
                    rz[b] += r;
                }
            }
        }
        for a in 0..k {
            if z.get(i, a) == 1 {
                for (b, g) in grad.row_mut(a).iter_mut().enumerate() {
                    *g += rz[b];
                }
            }
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::LN_2;
    use rand::Rng;

    fn state(z: &[Vec<u8>], w: &[Vec<f64>], lambda: f64) -> ModelState {
        let k = w.len();
        ModelState::new(
            BinaryMatrix::from_rows(z, k).unwrap(),
            RealMatrix::from_rows(w, k).unwrap(),
            lambda,
        )
        .unwrap()
    }

    fn random_instance(seed: u64, n: usize, k: usize) -> (AdjacencyMatrix, ObservationMask, ModelState) {
        let mut rng = seeded_rng(seed);
        let mut y = AdjacencyMatrix::zeros(n).unwrap();
        let mut mask = ObservationMask::empty(n);
        for i in 0..n {
            for j in 0..n {
                y.set(i, j, rng.random_bool(0.4)).unwrap();
                if i != j {
                    mask.set(i, j, rng.random_bool(0.8)).unwrap();
                }
            }
        }
        let z: Vec<Vec<u8>> = (0..n).map(|_| (0..k).map(|_| rng.random_bool(0.5) as u8).collect()).collect();
        let w: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        (y, mask, state(&z, &w, 0.5))
    }

    #[test]
    fn link_probability_examples() {
        let s = state(&[vec![0, 0], vec![0, 0]], &[vec![1.0, 2.0], vec![3.0, 4.0]], 0.5);
        assert_eq!(link_probability(&s, 0, 1).unwrap(), 0.5);

        let s = state(&[vec![1, 0], vec![0, 1]], &[vec![0.3, -1.7], vec![0.9, 2.2]], 0.5);
        assert_eq!(link_probability(&s, 0, 1).unwrap(), sigmoid(-1.7));

        let s = state(&[vec![1, 1], vec![1, 1]], &[vec![1.0, 1.0], vec![1.0, 1.0]], 0.5);
        assert!((link_probability(&s, 0, 1).unwrap() - 0.982014).abs() < 1e-6);
        assert!(matches!(link_probability(&s, 2, 0), Err(crate::Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn nll_examples() {
        let y = AdjacencyMatrix::new(BinaryMatrix::from_rows(&[vec![0, 1], vec![0, 0]], 2).unwrap(), false).unwrap();
        let mask = ObservationMask::from_entries(2, [(0, 1)]).unwrap();
        let s = ModelState::empty(2, 0.5).unwrap();
        assert!((negative_log_likelihood(&y, &mask, &s).unwrap() - LN_2).abs() < 1e-15);

        // Saturated logits matching the data.
        let s = state(&[vec![1, 0], vec![0, 1]], &[vec![-50.0, 50.0], vec![-50.0, -50.0]], 0.5);
        let full = ObservationMask::full(2, true);
        let nll = negative_log_likelihood(&y, &full, &s).unwrap();
        assert!(nll / 4.0 < 1e-20, "{nll}");
    }

    #[test]
    fn objective_examples() {
        let y = AdjacencyMatrix::zeros(3).unwrap();
        let s = state(&[vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 1]], &[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]], 0.5);
        assert!((objective(&y, &ObservationMask::empty(3), &s).unwrap() - 0.75).abs() < 1e-15);

        let s = ModelState::empty(3, 0.5).unwrap();
        let mask = ObservationMask::from_entries(3, [(1, 2)]).unwrap();
        assert!((objective(&y, &mask, &s).unwrap() - LN_2).abs() < 1e-15);

        let (y, mask, mut s) = random_instance(5, 5, 2);
        s.set_lambda(0.0).unwrap();
        assert_eq!(objective(&y, &mask, &s).unwrap(), negative_log_likelihood(&y, &mask, &s).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (y, _, s) = random_instance(1, 4, 2);
        let mask = ObservationMask::full(5, false);
        assert!(matches!(objective(&y, &mask, &s), Err(crate::Error::DimensionMismatch { .. })));
        assert!(nll_gradient_w(&y, &mask, &s).is_err());
    }

    #[test]
    fn gradient_zero_for_empty_features() {
        let (y, mask, _) = random_instance(2, 5, 2);
        let s = state(&vec![vec![0, 0]; 5], &[vec![1.0, -1.0], vec![0.5, 2.0]], 0.5);
        let g = nll_gradient_w(&y, &mask, &s).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn gradient_vanishes_at_saturated_fit() {
        let y = AdjacencyMatrix::new(BinaryMatrix::from_rows(&[vec![0, 1], vec![0, 0]], 2).unwrap(), false).unwrap();
        let s = state(&[vec![1, 0], vec![0, 1]], &[vec![-60.0, 60.0], vec![-60.0, -60.0]], 0.5);
        let g = nll_gradient_w(&y, &ObservationMask::full(2, true), &s).unwrap();
        assert!(g.max_abs() < 1e-10);
    }

    #[test]
    fn caches_are_coherent_after_construction() {
        for seed in 0..10 {
            let (_, _, s) = random_instance(seed, 7, 3);
            assert!(s.cache_error() <= CACHE_TOLERANCE);
            for i in 0..7 {
                for j in 0..7 {
                    assert!((s.logit(i, j) - bilinear_logit(s.z(), s.w(), i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn transpose_symmetry() {
        for seed in 0..20 {
            let (_, _, s) = random_instance(seed, 6, 3);
            let t = ModelState::new(s.z().clone(), s.w().transpose(), 0.5).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    let a = link_probability(&s, i, j).unwrap();
                    let b = link_probability(&t, j, i).unwrap();
                    assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_state() {
        let z = BinaryMatrix::from_rows(&[vec![2]], 1).unwrap();
        assert!(ModelState::new(z, RealMatrix::zeros(1, 1), 0.5).is_err());
        let z = BinaryMatrix::from_rows(&[vec![1]], 1).unwrap();
        assert!(ModelState::new(z.clone(), RealMatrix::zeros(2, 2), 0.5).is_err());
        assert!(ModelState::new(z, RealMatrix::zeros(1, 1), -1.0).is_err());
    }
}
