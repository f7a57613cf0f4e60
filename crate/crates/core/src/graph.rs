//! Relational data: the binary adjacency matrix and observation masks.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{check_dim, check_index, invalid, Result};
use crate::matrix::BinaryMatrix;
use crate::rng::seeded_rng;

/// An N×N binary relation `Y`, optionally with node labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: BinaryMatrix,
    labels: Option<Vec<String>>,
    symmetric_hint: bool,
}

impl AdjacencyMatrix {
    pub fn new(entries: BinaryMatrix, symmetric_hint: bool) -> Result<Self> {
        if entries.rows() == 0 {
            return Err(invalid("adjacency matrix must have at least one node"));
        }
        check_dim("adjacency columns", entries.rows(), entries.cols())?;
        if !entries.is_binary() {
            return Err(invalid("adjacency entries must be 0 or 1"));
        }
        Ok(AdjacencyMatrix {
            entries,
            labels: None,
            symmetric_hint,
        })
    }

    /// Builds the matrix and sets `symmetric_hint` from `Y == Yᵀ`.
    pub fn with_detected_symmetry(entries: BinaryMatrix) -> Result<Self> {
        let mut adj = Self::new(entries, false)?;
        adj.symmetric_hint = adj.is_symmetric();
        Ok(adj)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(BinaryMatrix::zeros(n, n), false)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_dim("node labels", self.n(), labels.len())?;
        let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if distinct.len() != labels.len() {
            return Err(invalid("node labels must be distinct"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries.get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) -> Result<()> {
        check_index("node", i, self.n())?;
        check_index("node", j, self.n())?;
        self.entries.set(i, j, value as u8);
        Ok(())
    }

    pub fn entries(&self) -> &BinaryMatrix {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn symmetric_hint(&self) -> bool {
        self.symmetric_hint
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (i + 1..n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Number of ones in the matrix.
    pub fn edge_count(&self) -> usize {
        self.entries.as_slice().iter().map(|&v| v as usize).sum()
    }
}

/// Which `(i, j)` entries of `Y` are observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    n: usize,
    observed: Vec<bool>,
}

impl ObservationMask {
    /// A mask with nothing observed.
    pub fn empty(n: usize) -> Self {
        ObservationMask {
            n,
            observed: vec![false; n * n],
        }
    }

    /// Every entry observed; the diagonal only when `include_diagonal`.
    pub fn full(n: usize, include_diagonal: bool) -> Self {
        let mut mask = ObservationMask {
            n,
            observed: vec![true; n * n],
        };
        if !include_diagonal {
            mask.clear_diagonal();
        }
        mask
    }

    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mask = Self::empty(n);
        for (i, j) in entries {
            mask.set(i, j, true)?;
        }
        Ok(mask)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) -> Result<()> {
        check_index("node", i, self.n)?;
        check_index("node", j, self.n)?;
        self.observed[i * self.n + j] = value;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.observed.iter().any(|&v| v)
    }

    /// Observed entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.observed
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(idx, _)| (idx / n, idx % n))
    }

    pub fn has_diagonal(&self) -> bool {
        (0..self.n).any(|i| self.is_observed(i, i))
    }

    pub fn clear_diagonal(&mut self) {
        for i in 0..self.n {
            self.observed[i * self.n + i] = false;
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.is_observed(i, j) == self.is_observed(j, i)))
    }

    pub fn is_disjoint(&self, other: &ObservationMask) -> bool {
        self.n == other.n && self.observed.iter().zip(&other.observed).all(|(a, b)| !(*a && *b))
    }

    pub fn union(&self, other: &ObservationMask) -> Result<ObservationMask> {
        check_dim("mask size", self.n, other.n)?;
        Ok(ObservationMask {
            n: self.n,
            observed: self.observed.iter().zip(&other.observed).map(|(a, b)| *a || *b).collect(),
        })
    }

    /// Entries observed here but not in `other`.
    pub fn difference(&self, other: &ObservationMask) -> Result<ObservationMask> {
        check_dim("mask size", self.n, other.n)?;
        Ok(ObservationMask {
            n: self.n,
            observed: self.observed.iter().zip(&other.observed).map(|(a, b)| *a && !*b).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitOptions {
    /// Keep `(i, j)` and `(j, i)` in the same partition.
    pub tie_symmetric: bool,
    /// Make diagonal entries eligible for either partition.
    pub include_diagonal: bool,
}

/// Seeded random partition of the off-diagonal entries into train and test
/// masks, with `⌊train_fraction · M⌋` units going to train.
pub fn split_observations(
    adj: &AdjacencyMatrix,
    train_fraction: f64,
    seed: u64,
    tie_symmetric: bool,
) -> Result<(ObservationMask, ObservationMask)> {
    split_observations_with(
        adj.n(),
        train_fraction,
        seed,
        SplitOptions {
            tie_symmetric,
            include_diagonal: false,
        },
    )
}

pub fn split_observations_with(
    n: usize,
    train_fraction: f64,
    seed: u64,
    options: SplitOptions,
) -> Result<(ObservationMask, ObservationMask)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(invalid(format!(
            "train fraction must lie in (0, 1], got {train_fraction}"
        )));
    }
    // A unit is one entry, or an unordered off-diagonal pair when tied.
    let mut units: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let eligible = if i == j {
                options.include_diagonal
            } else {
                !options.tie_symmetric || i < j
            };
            if eligible {
                units.push((i, j));
            }
        }
    }
    let mut rng = seeded_rng(seed);
    units.shuffle(&mut rng);
    let n_train = libm::floor(train_fraction * units.len() as f64 + 1e-9) as usize;
    let n_train = n_train.min(units.len());

    let mut train = ObservationMask::empty(n);
    let mut test = ObservationMask::empty(n);
    for (idx, &(i, j)) in units.iter().enumerate() {
        let target = if idx < n_train { &mut train } else { &mut test };
        target.observed[i * n + j] = true;
        if options.tie_symmetric {
            target.observed[j * n + i] = true;
        }
    }
    Ok((train, test))
}
