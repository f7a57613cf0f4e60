//! Deterministic small-variance-asymptotics inference for the latent
//! feature relational model.
//!
//! Given a partially observed binary relation `Y` over `N` nodes, the crate
//! learns a binary node-community matrix `Z` (N × K⁺) and a real interaction
//! matrix `W` (K⁺ × K⁺) by greedily minimizing
//!
//! ```text
//! Q(W, Z) = Σ_observed [ log(1 + exp(z_iᵀ W z_j)) - y_ij z_iᵀ W z_j ] + K⁺ λ²
//! ```
//!
//! and scores held-out links with `σ(z_iᵀ W z_j)`.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; `std` only adds a wall-clock source for fit timings. File
//! formats, the CLI and parallel orchestration live in the `lafter` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bregman;
pub mod error;
pub mod eval;
pub mod generator;
pub mod graph;
mod linalg;
pub mod matrix;
pub mod model;
pub mod numeric;
pub mod optimizer;
pub mod rng;

pub use error::{Error, Result};
pub use eval::{auc_roc, cross_validate_lambda, evaluate_split, predict_links, CvResult, CvRow, ScoredPair, ScoredPairs};
pub use graph::{split_observations, split_observations_with, AdjacencyMatrix, ObservationMask, SplitOptions};
pub use matrix::{BinaryMatrix, Dense, RealMatrix};
pub use model::{link_probability, negative_log_likelihood, nll_gradient_w, objective, ModelState};
pub use optimizer::{
    delta_objective_flip, fit, fit_with, init_state, optimize_w, propose_feature, prune_empty_features, sweep_z,
    sweep_z_to_fixed_point, BirthSweep, Clock, FitConfig, FitReport, IterationInfo, NoClock, WDescent, WSolver,
};
#[cfg(feature = "std")]
pub use optimizer::WallClock;
pub use rng::{seeded_rng, SeededRng};
