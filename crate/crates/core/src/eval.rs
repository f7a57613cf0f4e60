//! Held-out link prediction: scoring, AUC-ROC and cross-validation of λ.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{check_dim, check_index, invalid, Error, Result};
use crate::graph::{AdjacencyMatrix, ObservationMask};
use crate::model::ModelState;
use crate::numeric::sigmoid;
use crate::optimizer::{fit, FitConfig, FitReport};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub i: usize,
    pub j: usize,
    pub score: f64,
    pub label: u8,
}

/// Scored entries; each `(i, j)` at most once, scores finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoredPairs {
    pairs: Vec<ScoredPair>,
}

impl ScoredPairs {
    pub fn new(pairs: Vec<ScoredPair>) -> Result<Self> {
        let mut keys: Vec<(usize, usize)> = pairs.iter().map(|p| (p.i, p.j)).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("scored pairs contain a duplicate (i, j)"));
        }
        if let Some(p) = pairs.iter().find(|p| !p.score.is_finite() || p.label > 1) {
            return Err(invalid(format!(
                "pair ({}, {}) has score {} and label {}",
                p.i, p.j, p.score, p.label
            )));
        }
        Ok(ScoredPairs { pairs })
    }

    /// Pairs without node indices, numbered in order.
    pub fn from_scores(scores: &[f64], labels: &[u8]) -> Result<Self> {
        check_dim("labels", scores.len(), labels.len())?;
        Self::new(
            scores
                .iter()
                .zip(labels)
                .enumerate()
                .map(|(idx, (&score, &label))| ScoredPair { i: idx, j: 0, score, label })
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[ScoredPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Link probabilities for the given pairs, in order.
pub fn predict_links(state: &ModelState, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&(i, j)| {
            check_index("node", i, state.n())?;
            check_index("node", j, state.n())?;
            Ok(sigmoid(state.logit(i, j)))
        })
        .collect()
}

/// Mann–Whitney AUC: `(concordant + ½·tied) / (positives · negatives)`.
pub fn auc_roc(scored: &ScoredPairs) -> Result<f64> {
    let mut items: Vec<(f64, u8)> = scored.pairs.iter().map(|p| (p.score, p.label)).collect();
    let positives = items.iter().filter(|(_, l)| *l == 1).count();
    let negatives = items.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both classes, got {positives} positives and {negatives} negatives"
        )));
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Walk tie groups in ascending order; every negative strictly below a
    // positive is concordant, negatives in the same group count half.
    let mut negatives_below = 0usize;
    let mut credit = 0.0;
    let mut start = 0;
    while start < items.len() {
        let mut end = start;
        while end < items.len() && items[end].0 == items[start].0 {
            end += 1;
        }
        let group_pos = items[start..end].iter().filter(|(_, l)| *l == 1).count();
        let group_neg = (end - start) - group_pos;
        credit += group_pos as f64 * (negatives_below as f64 + 0.5 * group_neg as f64);
        negatives_below += group_neg;
        start = end;
    }
    Ok(credit / (positives as f64 * negatives as f64))
}

/// Scores every entry of `mask` (row-major) with the model.
pub fn score_entries(y: &AdjacencyMatrix, mask: &ObservationMask, state: &ModelState) -> Result<ScoredPairs> {
    check_dim("adjacency size", state.n(), y.n())?;
    check_dim("mask size", state.n(), mask.n())?;
    let pairs = mask
        .entries()
        .map(|(i, j)| ScoredPair {
            i,
            j,
            score: sigmoid(state.logit(i, j)),
            label: y.get(i, j),
        })
        .collect();
    ScoredPairs::new(pairs)
}

/// Fits on `train_mask` alone and reports AUC on `test_mask`.
pub fn evaluate_split(
    y: &AdjacencyMatrix,
    train_mask: &ObservationMask,
    test_mask: &ObservationMask,
    config: &FitConfig,
) -> Result<(f64, FitReport)> {
    if !train_mask.is_disjoint(test_mask) {
        return Err(invalid("train and test masks overlap"));
    }
    let report = fit(y, train_mask, config)?;
    let scored = score_entries(y, test_mask, &report.final_state)?;
    let auc = auc_roc(&scored)?;
    Ok((auc, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub lambda: f64,
    /// Mean validation AUC over the folds that could be scored.
    pub mean_auc: f64,
    pub folds_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_lambda: f64,
    pub table: Vec<CvRow>,
}

/// Splits the training entries into `folds` seeded folds and picks the λ
/// with the highest mean validation AUC (ties go to the smaller λ).
pub fn cross_validate_lambda(
    y: &AdjacencyMatrix,
    train_mask: &ObservationMask,
    grid: &[f64],
    folds: usize,
    seed: u64,
    config: &FitConfig,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    if folds < 2 {
        return Err(invalid(format!("need at least 2 folds, got {folds}")));
    }
    let mut entries: Vec<(usize, usize)> = train_mask.entries().collect();
    if entries.len() < folds {
        return Err(invalid(format!(
            "{} training entries cannot fill {folds} folds",
            entries.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    entries.shuffle(&mut rng);
    let n = train_mask.n();
    let mut validation: Vec<ObservationMask> = (0..folds).map(|_| ObservationMask::empty(n)).collect();
    for (idx, &(i, j)) in entries.iter().enumerate() {
        validation[idx % folds].set(i, j, true)?;
    }

    let mut table = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let fold_config = FitConfig { lambda, ..config.clone() };
        fold_config.validate()?;
        let mut sum = 0.0;
        let mut used = 0;
        for (f, held) in validation.iter().enumerate() {
            let fold_train = train_mask.difference(held)?;
            match evaluate_split(y, &fold_train, held, &fold_config) {
                Ok((auc, _)) => {
                    sum += auc;
                    used += 1;
                }
                Err(Error::UndefinedMetric(msg)) => {
                    log::warn!("skipping fold {f} for lambda {lambda}: {msg}");
                }
                Err(e) => return Err(e),
            }
        }
        if used == 0 {
            return Err(Error::UndefinedMetric(format!(
                "no fold could be scored for lambda {lambda}"
            )));
        }
        table.push(CvRow {
            lambda,
            mean_auc: sum / used as f64,
            folds_used: used,
        });
    }

    let best = table
        .iter()
        .fold(None::<&CvRow>, |best, row| match best {
            None => Some(row),
            Some(b) if row.mean_auc > b.mean_auc || (row.mean_auc == b.mean_auc && row.lambda < b.lambda) => {
                Some(row)
            }
            keep => keep,
        })
        .map(|r| r.lambda)
        .unwrap_or(grid[0]);
    Ok(CvResult {
        best_lambda: best,
        table,
    })
}
