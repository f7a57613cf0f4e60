//! Synthetic data from the latent feature relational model: an Indian
//! Buffet Process draw for `Z`, Gaussian `W`, Bernoulli-logit links.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{check_dim, invalid, Result};
use crate::graph::AdjacencyMatrix;
use crate::matrix::{BinaryMatrix, RealMatrix};
use crate::model::bilinear_logit;
use crate::numeric::sigmoid;
use crate::rng::{seeded_rng, SeededRng};

/// Column statistics of a binary feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IbpStats {
    pub n: usize,
    pub k_plus: usize,
    /// `m_k`: number of rows with feature `k`.
    pub column_counts: Vec<usize>,
    /// How many columns share each distinct column pattern ("history").
    pub history_multiplicities: Vec<usize>,
}

impl IbpStats {
    pub fn from_matrix(z: &BinaryMatrix) -> Self {
        let n = z.rows();
        let k = z.cols();
        let mut histories: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut column_counts = Vec::with_capacity(k);
        for c in 0..k {
            let column: Vec<u8> = (0..n).map(|i| z.get(i, c)).collect();
            column_counts.push(column.iter().map(|&v| v as usize).sum());
            *histories.entry(column).or_insert(0) += 1;
        }
        IbpStats {
            n,
            k_plus: k,
            column_counts,
            history_multiplicities: histories.into_values().collect(),
        }
    }
}

/// Sequential IBP draw: row `i` (1-based) takes existing feature `k` with
/// probability `m_k / i`, then opens `Poisson(α / i)` new features.
pub fn sample_ibp(n: usize, alpha: f64, seed: u64) -> Result<BinaryMatrix> {
    let mut rng = seeded_rng(seed);
    sample_ibp_with(n, alpha, &mut rng)
}

pub fn sample_ibp_with(n: usize, alpha: f64, rng: &mut SeededRng) -> Result<BinaryMatrix> {
    if n == 0 {
        return Err(invalid("node count must be at least 1"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    // columns[k] lists the rows holding feature k
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let customer = (i + 1) as f64;
        for members in columns.iter_mut() {
            let p = members.len() as f64 / customer;
            if rng.random_bool(p.min(1.0)) {
                members.push(i);
            }
        }
        if alpha > 0.0 {
            let poisson = Poisson::new(alpha / customer)
                .map_err(|e| invalid(format!("bad Poisson rate: {e}")))?;
            let fresh = poisson.sample(rng) as usize;
            for _ in 0..fresh {
                columns.push(vec![i]);
            }
        }
    }
    let mut z = BinaryMatrix::zeros(n, columns.len());
    for (k, members) in columns.iter().enumerate() {
        for &i in members {
            z.set(i, k, 1);
        }
    }
    Ok(z)
}

fn ln_factorial(m: usize) -> f64 {
    libm::lgamma(m as f64 + 1.0)
}

fn ln_binomial(n: usize, m: usize) -> f64 {
    ln_factorial(n) - ln_factorial(m) - ln_factorial(n - m)
}

/// Log IBP prior in the closed form
/// `K⁺ log α - Σ_h log K̃_h! - α H_N - Σ_k [log m_k + log C(N, m_k)]`.
///
/// The combinatorial factor here is `m_k⁻¹ C(N, m_k)⁻¹`; the usual
/// exchangeable IBP density uses `(N - m_k)! (m_k - 1)! / N!` instead, which
/// is the same quantity: `(N - m_k)! (m_k - 1)! / N! = 1 / (m_k C(N, m_k))`.
pub fn ibp_log_prior(z: &BinaryMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !z.is_binary() {
        return Err(invalid("Z entries must be 0 or 1"));
    }
    let stats = IbpStats::from_matrix(z);
    if let Some(k) = stats.column_counts.iter().position(|&m| m == 0) {
        return Err(invalid(format!("column {k} of Z is empty; drop empty columns first")));
    }
    let n = stats.n;
    let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
    let mut value = stats.k_plus as f64 * libm::log(alpha) - alpha * harmonic;
    value -= stats.history_multiplicities.iter().map(|&h| ln_factorial(h)).sum::<f64>();
    for &m in &stats.column_counts {
        value -= libm::log(m as f64) + ln_binomial(n, m);
    }
    Ok(value)
}

/// A draw `(Z, W, Y)` from the generative model.
#[derive(Debug, Clone, PartialEq)]
pub struct LfrmSample {
    pub z: BinaryMatrix,
    pub w: RealMatrix,
    pub y: AdjacencyMatrix,
}

pub fn sample_lfrm(n: usize, alpha: f64, sigma_w: f64, seed: u64) -> Result<LfrmSample> {
    if !(sigma_w > 0.0 && sigma_w.is_finite()) {
        return Err(invalid(format!("sigma_w must be positive, got {sigma_w}")));
    }
    let mut rng = seeded_rng(seed);
    let z = sample_ibp_with(n, alpha, &mut rng)?;
    let k = z.cols();
    let normal = Normal::new(0.0, sigma_w).map_err(|e| invalid(format!("{e}")))?;
    let mut w = RealMatrix::zeros(k, k);
    for v in w.as_mut_slice() {
        *v = normal.sample(&mut rng);
    }
    let y = sample_links_with(&z, &w, &mut rng)?;
    Ok(LfrmSample { z, w, y })
}

/// Draws every off-diagonal `y_ij ~ Bernoulli(σ(z_iᵀ W z_j))`; the diagonal
/// is left at zero.
pub fn sample_links(z: &BinaryMatrix, w: &RealMatrix, seed: u64) -> Result<AdjacencyMatrix> {
    let mut rng = seeded_rng(seed);
    sample_links_with(z, w, &mut rng)
}

pub fn sample_links_with(z: &BinaryMatrix, w: &RealMatrix, rng: &mut SeededRng) -> Result<AdjacencyMatrix> {
    if !z.is_binary() {
        return Err(invalid("Z entries must be 0 or 1"));
    }
    check_dim("W rows", z.cols(), w.rows())?;
    check_dim("W columns", z.cols(), w.cols())?;
    let n = z.rows();
    let mut entries = BinaryMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let p = sigmoid(bilinear_logit(z, w, i, j));
                entries.set(i, j, rng.random_bool(p) as u8);
            }
        }
    }
    AdjacencyMatrix::with_detected_symmetry(entries)
}

/// Disjoint communities of near-equal size: node `i` joins block
/// `i * blocks / n`.
pub fn planted_blocks(n: usize, blocks: usize) -> Result<BinaryMatrix> {
    if blocks == 0 || blocks > n {
        return Err(invalid(format!("need 1 <= blocks <= n, got {blocks} blocks for {n} nodes")));
    }
    let mut z = BinaryMatrix::zeros(n, blocks);
    for i in 0..n {
        z.set(i, i * blocks / n, 1);
    }
    Ok(z)
}

/// `within` on the diagonal, `across` elsewhere.
pub fn block_interactions(blocks: usize, within: f64, across: f64) -> RealMatrix {
    let mut w = RealMatrix::filled(blocks, blocks, across);
    for k in 0..blocks {
        w.set(k, k, within);
    }
    w
}
