//! Greedy alternating minimization of the penalized objective.
//!
//! Each outer iteration:
//!
//! 1. sweeps every `z_nk` in row-major order, flipping it when that strictly
//!    lowers `Q`, until no single flip helps;
//! 2. runs a descent method with Armijo backtracking on `W` (convex for a
//!    fixed `Z`), damped Newton by default;
//! 3. drops all-zero columns of `Z`;
//! 4. proposes a new feature seeded on one random node, fits it, and keeps
//!    it only if the proposal lowers `Q`.
//!
//! Every step is a descent step, so the recorded objective never increases.
//! A flip of `z_nk` changes only row `n` and column `n` of the logit matrix,
//! by `±left[j][k]` and `±right[i][k]` respectively, which is what makes a
//! flip evaluation `O(N)` instead of a full `O(N²K²)` recompute.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_index, invalid, Error, Result};
use crate::graph::{AdjacencyMatrix, ObservationMask};
use crate::matrix::{BinaryMatrix, RealMatrix};
use crate::model::{check_problem, gradient_from_logits, nll_from_logits, penalty, ModelState};
use crate::numeric::{logit_loss, sigmoid};
use crate::rng::{seeded_rng, SeededRng};

/// A flip is taken only when it lowers `Q` by more than this.
pub const FLIP_THRESHOLD: f64 = 1e-12;
/// A proposed feature is kept only when it lowers `Q` by more than this.
pub const BIRTH_THRESHOLD: f64 = 1e-12;
/// Sufficient-decrease constant of the Armijo condition.
pub const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_SWEEPS: usize = 100_000;

/// Which coordinates the candidate sweep visits after a feature birth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BirthSweep {
    /// Sweep the whole of `Z'`.
    #[default]
    AllColumns,
    /// Sweep only the newly added column.
    NewColumnOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Per-feature penalty is `lambda²`.
    pub lambda: f64,
    /// Standard deviation of the Gaussian used to initialize `W` entries.
    pub sigma_w: f64,
    pub k_init: usize,
    pub max_outer_iters: usize,
    /// Relative objective improvement below which an outer iteration counts
    /// as stalled.
    pub rel_tol: f64,
    pub w_max_steps: usize,
    pub w_grad_tol: f64,
    pub seed: u64,
    pub births_per_iter: usize,
    pub include_diagonal: bool,
    pub birth_sweep: BirthSweep,
    pub w_solver: WSolver,
}

/// Descent direction used when optimizing `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WSolver {
    /// Damped Newton: the Hessian is only `K⁺² × K⁺²`.
    #[default]
    Newton,
    /// Steepest descent on the exact gradient.
    GradientDescent,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 0.5,
            sigma_w: 1.0,
            k_init: 1,
            max_outer_iters: 100,
            rel_tol: 1e-6,
            w_max_steps: 200,
            w_grad_tol: 1e-6,
            seed: 0,
            births_per_iter: 1,
            include_diagonal: false,
            birth_sweep: BirthSweep::AllColumns,
            w_solver: WSolver::Newton,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("sigma_w", self.sigma_w)?;
        positive("rel_tol", self.rel_tol)?;
        positive("w_grad_tol", self.w_grad_tol)?;
        if self.k_init == 0 {
            return Err(invalid("k_init must be at least 1"));
        }
        if self.max_outer_iters == 0 {
            return Err(invalid("max_outer_iters must be at least 1"));
        }
        if self.w_max_steps == 0 {
            return Err(invalid("w_max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Per-iteration record of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Objective of the initial state.
    pub initial_objective: f64,
    /// Objective after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub k_trace: Vec<usize>,
    /// Empty columns removed in each outer iteration.
    pub pruned: Vec<usize>,
    /// One entry per proposal, in order.
    pub accepted_births: Vec<bool>,
    /// Seconds since the start of the fit, sampled after each iteration.
    pub elapsed: Vec<f64>,
    pub converged: bool,
    pub final_state: ModelState,
}

impl FitReport {
    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(self.initial_objective)
    }
}

/// Source of elapsed wall-clock time for [`FitReport::elapsed`].
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// A clock that never advances; used when no time source is available.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn start() -> Self {
        WallClock(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Snapshot handed to observers after each outer iteration.
#[derive(Debug)]
pub struct IterationInfo<'a> {
    pub iteration: usize,
    pub objective: f64,
    pub elapsed: f64,
    pub birth_accepted: bool,
    pub state: &'a ModelState,
}

/// Random initial state: fair-coin `Z` (n × k_init) and Gaussian `W`.
pub fn init_state(n: usize, config: &FitConfig) -> Result<ModelState> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    init_state_with(n, config, &mut rng)
}

fn init_state_with(n: usize, config: &FitConfig, rng: &mut SeededRng) -> Result<ModelState> {
    if n == 0 {
        return Err(invalid("node count must be at least 1"));
    }
    let k = config.k_init;
    let mut z = BinaryMatrix::zeros(n, k);
    for v in z.as_mut_slice() {
        *v = rng.random_bool(0.5) as u8;
    }
    let normal = gaussian(config.sigma_w)?;
    let mut w = RealMatrix::zeros(k, k);
    for v in w.as_mut_slice() {
        *v = normal.sample(rng);
    }
    ModelState::new(z, w, config.lambda)
}

fn gaussian(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| invalid(format!("bad sigma_w {sigma}: {e}")))
}

/// `Q(state with z_nk flipped) - Q(state)`, from the caches in `O(N)`.
pub fn delta_objective_flip(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &ModelState,
    n: usize,
    k: usize,
) -> Result<f64> {
    check_problem(y, mask, state.n())?;
    check_index("node", n, state.n())?;
    check_index("feature", k, state.k_plus())?;
    Ok(flip_delta(y, mask, state, n, k))
}

#[inline]
fn flip_sign(state: &ModelState, n: usize, k: usize) -> f64 {
    if state.z().get(n, k) == 1 {
        -1.0
    } else {
        1.0
    }
}

fn flip_delta(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState, n: usize, k: usize) -> f64 {
    let size = state.n();
    let delta = flip_sign(state, n, k);
    let logits = state.logits();
    let left = state.left_cache();
    let right = state.right_cache();
    let mut total = 0.0;
    let row = logits.row(n);
    for j in 0..size {
        if j != n && mask.is_observed(n, j) {
            let a = row[j];
            let yv = y.get(n, j);
            total += logit_loss(a + delta * left.get(j, k), yv) - logit_loss(a, yv);
        }
    }
    for i in 0..size {
        if i != n && mask.is_observed(i, n) {
            let a = logits.get(i, n);
            let yv = y.get(i, n);
            total += logit_loss(a + delta * right.get(i, k), yv) - logit_loss(a, yv);
        }
    }
    if mask.is_observed(n, n) {
        let a = logits.get(n, n);
        let moved = a + delta * (left.get(n, k) + right.get(n, k)) + state.w().get(k, k);
        let yv = y.get(n, n);
        total += logit_loss(moved, yv) - logit_loss(a, yv);
    }
    total
}

/// Flips `z_nk` and patches the caches in `O(N + K)`.
fn apply_flip(state: &mut ModelState, n: usize, k: usize) {
    let delta = flip_sign(state, n, k);
    let size = state.n();
    let kp = state.k_plus();
    let (z, w, logits, left, right) = state.parts_mut();
    let left_nk = left.get(n, k);
    let right_nk = right.get(n, k);
    for j in 0..size {
        if j != n {
            let v = logits.get(n, j) + delta * left.get(j, k);
            logits.set(n, j, v);
        }
    }
    for i in 0..size {
        if i != n {
            let v = logits.get(i, n) + delta * right.get(i, k);
            logits.set(i, n, v);
        }
    }
    let v = logits.get(n, n) + delta * (left_nk + right_nk) + w.get(k, k);
    logits.set(n, n, v);

    z.set(n, k, if delta > 0.0 { 1 } else { 0 });
    for b in 0..kp {
        let l = left.get(n, b) + delta * w.get(b, k);
        left.set(n, b, l);
        let r = right.get(n, b) + delta * w.get(k, b);
        right.set(n, b, r);
    }
}

/// One row-major pass over `Z`, taking every strictly improving flip.
/// Returns whether anything changed.
pub fn sweep_z(y: &AdjacencyMatrix, mask: &ObservationMask, state: &mut ModelState) -> Result<bool> {
    check_problem(y, mask, state.n())?;
    let columns: Vec<usize> = (0..state.k_plus()).collect();
    Ok(sweep_columns(y, mask, state, &columns) > 0)
}

fn sweep_columns(y: &AdjacencyMatrix, mask: &ObservationMask, state: &mut ModelState, columns: &[usize]) -> usize {
    let mut flips = 0;
    for n in 0..state.n() {
        for &k in columns {
            if flip_delta(y, mask, state, n, k) < -FLIP_THRESHOLD {
                apply_flip(state, n, k);
                flips += 1;
            }
        }
    }
    flips
}

/// Repeats [`sweep_z`] until no single flip lowers the objective.
/// Returns the number of flips taken.
fn is_flip_stable(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> bool {
    (0..state.n()).all(|n| (0..state.k_plus()).all(|k| flip_delta(y, mask, state, n, k) >= -FLIP_THRESHOLD))
}

pub fn sweep_z_to_fixed_point(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &mut ModelState,
) -> Result<usize> {
    check_problem(y, mask, state.n())?;
    let columns: Vec<usize> = (0..state.k_plus()).collect();
    Ok(sweep_columns_to_fixed_point(y, mask, state, &columns))
}

fn sweep_columns_to_fixed_point(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &mut ModelState,
    columns: &[usize],
) -> usize {
    let mut total = 0;
    for _ in 0..MAX_SWEEPS {
        let flips = sweep_columns(y, mask, state, columns);
        total += flips;
        if flips == 0 {
            break;
        }
    }
    // Incremental patches drift by rounding; start the next phase clean.
    if total > 0 {
        state.rebuild_caches();
    }
    total
}

/// Outcome of one call to [`optimize_w`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WDescent {
    pub steps: usize,
    pub grad_norm: f64,
}

/// Minimizes `Q` over `W` for the current `Z` by a descent method with Armijo
/// backtracking (initial step 1, halving). Every accepted step strictly
/// lowers `Q`; caches are rebuilt on exit.
pub fn optimize_w(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &mut ModelState,
    config: &FitConfig,
) -> Result<WDescent> {
    check_problem(y, mask, state.n())?;
    let k = state.k_plus();
    if k == 0 {
        return Ok(WDescent {
            steps: 0,
            grad_norm: 0.0,
        });
    }
    let mut current = nll_from_logits(y, mask, state.logits());
    if !current.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite objective {current} entering W descent (K+ = {k})"
        )));
    }
    let mut steps = 0;
    let mut grad_norm;
    let mut moved = false;
    loop {
        let (grad, hessian) = match config.w_solver {
            WSolver::Newton => {
                let (g, h) = gradient_and_hessian(y, mask, state.z(), state.logits());
                (g, Some(h))
            }
            WSolver::GradientDescent => (gradient_from_logits(y, mask, state.z(), state.logits()), None),
        };
        grad_norm = grad.max_abs();
        if !grad_norm.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite W gradient after {steps} steps (K+ = {k})"
            )));
        }
        if grad_norm < config.w_grad_tol || steps >= config.w_max_steps {
            break;
        }
        let step_dir = match hessian {
            Some(h) => newton_direction(&h, &grad),
            None => grad.clone(),
        };
        // Directional derivative of Q along -step_dir is -slope.
        let slope: f64 = grad.as_slice().iter().zip(step_dir.as_slice()).map(|(g, d)| g * d).sum();
        if !(slope > 0.0) {
            break;
        }
        let direction = logit_direction(state.z(), &step_dir);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = shifted_nll(y, mask, state.logits(), &direction, step);
            if trial.is_finite() && trial < current && trial <= current - ARMIJO_C * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(value) = accepted else { break };

        let mut w = state.w().clone();
        for (wv, dv) in w.as_mut_slice().iter_mut().zip(step_dir.as_slice()) {
            *wv -= step * dv;
        }
        let mut logits = state.logits().clone();
        for (av, dv) in logits.as_mut_slice().iter_mut().zip(direction.as_slice()) {
            *av -= step * dv;
        }
        state.set_w_and_logits(w, logits);
        let gain = current - value;
        current = value;
        steps += 1;
        moved = true;
        // Progress below rounding level of the objective.
        if gain <= 1e-15 * current.max(1.0) {
            break;
        }
    }
    if moved {
        state.rebuild_caches();
    }
    Ok(WDescent { steps, grad_norm })
}

/// Gradient `G` and Hessian of the NLL with respect to `vec(W)`, where
/// `(a, b)` maps to `a * K + b`:
/// `H[(a,b),(c,d)] = Σ_observed p_ij (1 - p_ij) z_ia z_ic z_jb z_jd`.
fn gradient_and_hessian(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    z: &BinaryMatrix,
    logits: &RealMatrix,
) -> (RealMatrix, RealMatrix) {
    let n = z.rows();
    let k = z.cols();
    let kk = k * k;
    let mut grad = RealMatrix::zeros(k, k);
    let mut hess = RealMatrix::zeros(kk, kk);
    let active: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..k).filter(|&a| z.get(i, a) == 1).collect())
        .collect();
    let mut rz = vec![0.0; k];
    let mut m = vec![0.0; kk];
    for i in 0..n {
        if active[i].is_empty() {
            continue;
        }
        rz.iter_mut().for_each(|v| *v = 0.0);
        m.iter_mut().for_each(|v| *v = 0.0);
        let row = logits.row(i);
        for j in 0..n {
            if !mask.is_observed(i, j) || active[j].is_empty() {
                continue;
            }
            let p = sigmoid(row[j]);
            let r = p - y.get(i, j) as f64;
            let s = p * (1.0 - p);
            for &b in &active[j] {
                rz[b] += r;
                for &d in &active[j] {
                    m[b * k + d] += s;
                }
            }
        }
        for &a in &active[i] {
            for (b, g) in grad.row_mut(a).iter_mut().enumerate() {
                *g += rz[b];
            }
            for &c in &active[i] {
                for b in 0..k {
                    let hrow = hess.row_mut(a * k + b);
                    let mrow = &m[b * k..(b + 1) * k];
                    for d in 0..k {
                        hrow[c * k + d] += mrow[d];
                    }
                }
            }
        }
    }
    (grad, hess)
}

/// Solves `(H + ρI) d = G`, raising the ridge `ρ` until the factorization
/// succeeds; falls back to `G` itself.
fn newton_direction(hess: &RealMatrix, grad: &RealMatrix) -> RealMatrix {
    let dim = grad.rows() * grad.cols();
    let scale = (0..dim).map(|i| hess.get(i, i)).fold(0.0, f64::max).max(1.0);
    let mut ridge = 1e-10 * scale;
    let mut a = hess.as_slice().to_vec();
    for _ in 0..12 {
        for i in 0..dim {
            a[i * dim + i] = hess.get(i, i) + ridge;
        }
        if let Some(d) = crate::linalg::cholesky_solve(&a, grad.as_slice(), dim) {
            if d.iter().all(|v| v.is_finite()) {
                return RealMatrix::from_vec(grad.rows(), grad.cols(), d).expect("shape");
            }
        }
        ridge *= 100.0;
    }
    grad.clone()
}

/// `D = Z G Zᵀ`: the change in every logit per unit step along `G`.
fn logit_direction(z: &BinaryMatrix, grad: &RealMatrix) -> RealMatrix {
    let n = z.rows();
    let k = z.cols();
    // zg[i][b] = Σ_a z_ia G_ab
    let mut zg = RealMatrix::zeros(n, k);
    for i in 0..n {
        for a in 0..k {
            if z.get(i, a) == 1 {
                for (dst, g) in zg.row_mut(i).iter_mut().zip(grad.row(a)) {
                    *dst += g;
                }
            }
        }
    }
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..n {
        let zgi = zg.row(i);
        for j in 0..n {
            let mut acc = 0.0;
            for (b, &bit) in z.row(j).iter().enumerate() {
                if bit == 1 {
                    acc += zgi[b];
                }
            }
            out.set(i, j, acc);
        }
    }
    out
}

fn shifted_nll(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    logits: &RealMatrix,
    direction: &RealMatrix,
    step: f64,
) -> f64 {
    let n = y.n();
    let mut total = 0.0;
    for i in 0..n {
        let a = logits.row(i);
        let d = direction.row(i);
        for j in 0..n {
            if mask.is_observed(i, j) {
                total += logit_loss(a[j] - step * d[j], y.get(i, j));
            }
        }
    }
    total
}

/// Builds a candidate with one extra feature: the new column of `Z` is on
/// for a single uniformly chosen node, the new row and column of `W` are
/// Gaussian draws, then `W` and `Z` of the candidate are re-optimized.
/// The input state is left untouched.
pub fn propose_feature(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    state: &ModelState,
    config: &FitConfig,
    rng: &mut SeededRng,
) -> Result<ModelState> {
    check_problem(y, mask, state.n())?;
    let n = state.n();
    let k = state.k_plus();
    let mut z = state.z().grown(0, 1);
    let node = rng.random_range(0..n);
    z.set(node, k, 1);

    let normal = gaussian(config.sigma_w)?;
    let mut w = state.w().grown(1, 1);
    for b in 0..=k {
        w.set(k, b, normal.sample(rng));
    }
    for a in 0..k {
        w.set(a, k, normal.sample(rng));
    }

    let mut candidate = ModelState::new(z, w, state.lambda())?;
    optimize_w(y, mask, &mut candidate, config)?;
    let columns: Vec<usize> = match config.birth_sweep {
        BirthSweep::AllColumns => (0..=k).collect(),
        BirthSweep::NewColumnOnly => vec![k],
    };
    sweep_columns_to_fixed_point(y, mask, &mut candidate, &columns);
    Ok(candidate)
}

/// Removes every all-zero column of `Z` with the matching row and column
/// of `W`. Returns the number of columns removed. Logits are untouched.
pub fn prune_empty_features(state: &mut ModelState) -> usize {
    let k = state.k_plus();
    let keep: Vec<usize> = (0..k).filter(|&c| !state.z().column_is_empty(c)).collect();
    let removed = k - keep.len();
    if removed == 0 {
        return 0;
    }
    let (z, w, logits, left, right) = state.parts_mut();
    *z = z.select_columns(&keep);
    *w = w.select_square(&keep);
    *left = left.select_columns(&keep);
    *right = right.select_columns(&keep);
    let _ = logits;
    removed
}

fn state_objective(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> f64 {
    nll_from_logits(y, mask, state.logits()) + penalty(state.k_plus(), state.lambda())
}

/// Runs the full alternating algorithm. Elapsed times come from the wall
/// clock when the `std` feature is on.
pub fn fit(y: &AdjacencyMatrix, mask: &ObservationMask, config: &FitConfig) -> Result<FitReport> {
    #[cfg(feature = "std")]
    let clock = WallClock::start();
    #[cfg(not(feature = "std"))]
    let clock = NoClock;
    fit_with(y, mask, config, &clock, &mut |_| {})
}

/// [`fit`] with an explicit clock and a callback invoked after every outer
/// iteration.
pub fn fit_with(
    y: &AdjacencyMatrix,
    mask: &ObservationMask,
    config: &FitConfig,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(&IterationInfo<'_>),
) -> Result<FitReport> {
    config.validate()?;
    check_problem(y, mask, y.n())?;
    let mask: Cow<'_, ObservationMask> = if !config.include_diagonal && mask.has_diagonal() {
        let mut m = mask.clone();
        m.clear_diagonal();
        Cow::Owned(m)
    } else {
        Cow::Borrowed(mask)
    };
    let mask = mask.as_ref();

    let mut rng = seeded_rng(config.seed);
    let mut state = init_state_with(y.n(), config, &mut rng)?;
    let initial_objective = state_objective(y, mask, &state);

    let mut objective_trace = Vec::new();
    let mut k_trace = Vec::new();
    let mut pruned_trace = Vec::new();
    let mut accepted_births = Vec::new();
    let mut elapsed = Vec::new();
    let mut converged = false;
    let mut previous = initial_objective;

    for iteration in 0..config.max_outer_iters {
        let columns: Vec<usize> = (0..state.k_plus()).collect();
        sweep_columns_to_fixed_point(y, mask, &mut state, &columns);
        optimize_w(y, mask, &mut state, config)?;
        let mut pruned = prune_empty_features(&mut state);
        let mut current = state_objective(y, mask, &state);

        let mut last_accepted = false;
        for _ in 0..config.births_per_iter {
            let mut candidate = propose_feature(y, mask, &state, config, &mut rng)?;
            let candidate_pruned = prune_empty_features(&mut candidate);
            let value = state_objective(y, mask, &candidate);
            last_accepted = value < current - BIRTH_THRESHOLD;
            accepted_births.push(last_accepted);
            if last_accepted {
                state = candidate;
                current = value;
                // The candidate carried every old column plus one new one.
                pruned += candidate_pruned;
            }
        }

        if !current.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became {current} at iteration {iteration}"
            )));
        }
        let seconds = clock.seconds();
        objective_trace.push(current);
        k_trace.push(state.k_plus());
        pruned_trace.push(pruned);
        elapsed.push(seconds);
        observer(&IterationInfo {
            iteration,
            objective: current,
            elapsed: seconds,
            birth_accepted: last_accepted,
            state: &state,
        });

        let scale = libm::fabs(previous).max(f64::MIN_POSITIVE);
        let improvement = (previous - current) / scale;
        previous = current;
        // W moved after the last sweep, so check that Z is still one-flip
        // optimal; otherwise the next iteration's sweep has work to do.
        if improvement < config.rel_tol && !last_accepted && is_flip_stable(y, mask, &state) {
            converged = true;
            break;
        }
    }

    Ok(FitReport {
        initial_objective,
        objective_trace,
        k_trace,
        pruned: pruned_trace,
        accepted_births,
        elapsed,
        converged,
        final_state: state,
    })
}
