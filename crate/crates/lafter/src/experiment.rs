//! Multi-split evaluation, λ cross-validation and AUC traces.
//!
//! Independent fits run on the rayon pool; every fit is sequential and
//! seeded, and results are collected in input order, so outputs do not
//! depend on the number of threads.

use std::io::{self, Write};
use std::time::Instant;

use lafter_core::eval::score_entries;
use lafter_core::{
    auc_roc, cross_validate_lambda, evaluate_split, fit_with, split_observations_with, AdjacencyMatrix, CvResult,
    FitConfig, FitReport, ObservationMask, SplitOptions, WallClock,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRun {
    pub split_seed: u64,
    pub lambda: f64,
    pub k_final: usize,
    pub auc: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub mean_auc: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_auc: f64,
    pub runs: Vec<EvalRun>,
}

impl EvalSummary {
    pub fn from_runs(runs: Vec<EvalRun>) -> Self {
        let n = runs.len() as f64;
        let mean_auc = runs.iter().map(|r| r.auc).sum::<f64>() / n;
        let std_auc = if runs.len() > 1 {
            (runs.iter().map(|r| (r.auc - mean_auc).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        EvalSummary { mean_auc, std_auc, runs }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SplitProtocol {
    pub splits: usize,
    pub train_fraction: f64,
    /// Split `s` uses seed `base_seed + s` for both the split and the fit.
    pub base_seed: u64,
    pub tie_symmetric: bool,
}

pub fn split_for(y: &AdjacencyMatrix, protocol: &SplitProtocol, seed: u64, config: &FitConfig) -> Result<(ObservationMask, ObservationMask)> {
    let opts = SplitOptions { tie_symmetric: protocol.tie_symmetric, include_diagonal: config.include_diagonal };
    Ok(split_observations_with(y.n(), protocol.train_fraction, seed, opts)?)
}

/// Fits and scores `protocol.splits` random train/test partitions.
pub fn run_splits(y: &AdjacencyMatrix, protocol: &SplitProtocol, config: &FitConfig) -> Result<EvalSummary> {
    let runs = (0..protocol.splits as u64)
        .into_par_iter()
        .map(|s| {
            let split_seed = protocol.base_seed.wrapping_add(s);
            let (train, test) = split_for(y, protocol, split_seed, config)?;
            let split_config = FitConfig { seed: split_seed, ..config.clone() };
            let start = Instant::now();
            let (auc, report) = evaluate_split(y, &train, &test, &split_config)?;
            Ok(EvalRun {
                split_seed,
                lambda: config.lambda,
                k_final: report.final_state.k_plus(),
                auc,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalSummary::from_runs(runs))
}

pub fn write_eval_csv<W: Write>(runs: &[EvalRun], mut out: W) -> io::Result<()> {
    writeln!(out, "split_seed,lambda,k_final,auc,seconds")?;
    for r in runs {
        writeln!(out, "{},{},{},{},{}", r.split_seed, r.lambda, r.k_final, r.auc, r.seconds)?;
    }
    Ok(())
}

/// Cross-validates each λ of the grid in parallel. Folds depend only on
/// `seed` and the training entries, so every λ sees the same folds.
pub fn cross_validate(
    y: &AdjacencyMatrix,
    train: &ObservationMask,
    grid: &[f64],
    folds: usize,
    seed: u64,
    config: &FitConfig,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(lafter_core::Error::InvalidArgument("lambda grid is empty".into()).into());
    }
    let rows = grid
        .par_iter()
        .map(|&lambda| Ok(cross_validate_lambda(y, train, &[lambda], folds, seed, config)?.table.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        let b = &rows[best];
        if row.mean_auc > b.mean_auc || (row.mean_auc == b.mean_auc && row.lambda < b.lambda) {
            best = i;
        }
    }
    Ok(CvResult { best_lambda: rows[best].lambda, table: rows })
}

pub fn write_cv_csv<W: Write>(cv: &CvResult, mut out: W) -> io::Result<()> {
    writeln!(out, "lambda,mean_auc,folds_used")?;
    for row in &cv.table {
        writeln!(out, "{},{},{}", row.lambda, row.mean_auc, row.folds_used)?;
    }
    Ok(())
}

/// `(seconds, heldout_auc)` after each outer iteration.
pub type AucTrace = Vec<(f64, f64)>;

/// Fits on `train` and scores `test` after every outer iteration.
pub fn fit_with_auc_trace(
    y: &AdjacencyMatrix,
    train: &ObservationMask,
    test: &ObservationMask,
    config: &FitConfig,
) -> Result<(FitReport, AucTrace)> {
    let mut trace = Vec::new();
    let mut failure = None;
    let clock = WallClock::start();
    let report = fit_with(y, train, config, &clock, &mut |info| {
        if failure.is_some() {
            return;
        }
        match score_entries(y, test, info.state).and_then(|s| auc_roc(&s)) {
            Ok(auc) => trace.push((info.elapsed, auc)),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok((report, trace))
}

pub fn write_trace_csv<W: Write>(trace: &[(f64, f64)], mut out: W) -> io::Result<()> {
    writeln!(out, "seconds,heldout_auc")?;
    for (s, a) in trace {
        writeln!(out, "{s},{a}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let run = |auc| EvalRun { split_seed: 0, lambda: 0.5, k_final: 1, auc, seconds: 0.0 };
        let s = EvalSummary::from_runs(vec![run(0.8), run(0.9), run(1.0)]);
        assert!((s.mean_auc - 0.9).abs() < 1e-12);
        assert!((s.std_auc - 0.1).abs() < 1e-12);
        assert_eq!(EvalSummary::from_runs(vec![run(0.7)]).std_auc, 0.0);
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_eval_csv(&[], &mut buf).unwrap();
        assert_eq!(buf, b"split_seed,lambda,k_final,auc,seconds\n");
        buf.clear();
        write_trace_csv(&[(0.5, 0.75)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "seconds,heldout_auc\n0.5,0.75\n");
    }
}
