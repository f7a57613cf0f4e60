use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lafter_core::generator::{block_interactions, planted_blocks, sample_links, sample_lfrm};
use lafter_core::{fit, predict_links, AdjacencyMatrix, BirthSweep, FitConfig, ObservationMask, WSolver};
use serde::Serialize;

use crate::communities::dump_communities;
use crate::error::{Error, Result};
use crate::experiment::{self, SplitProtocol};
use crate::io::{self, write_atomic, MatrixFormat};
use crate::model_file::ModelFile;

#[derive(Debug, Parser)]
#[command(name = "lafter", version, about = "Latent feature relational model fitting and link prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a graph and write it as JSON.
    Fit(FitCmd),
    /// Score node pairs with a fitted model.
    Predict(PredictCmd),
    /// Repeated random train/test splits with held-out AUC.
    Eval(EvalCmd),
    /// Choose lambda by k-fold cross-validation on the training entries.
    Cv(CvCmd),
    /// Sample a synthetic graph and its ground truth.
    Generate(GenerateCmd),
    /// List the members of each community of a fitted model.
    Communities(CommunitiesCmd),
    /// Write a seeded train/test mask for a graph.
    Split(SplitCmd),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Graph file (edge list or dense matrix).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: MatrixFormat,
    /// Node count for edge lists; defaults to one more than the largest id.
    #[arg(long)]
    pub nodes: Option<usize>,
}

impl InputArgs {
    fn load(&self) -> Result<AdjacencyMatrix> {
        io::read_matrix(&self.input, self.format, self.nodes)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Newton,
    Gradient,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_w: f64,
    #[arg(long, default_value_t = 1)]
    pub k_init: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Feature proposals per outer iteration.
    #[arg(long, default_value_t = 1)]
    pub births: usize,
    #[arg(long, default_value_t = 200)]
    pub w_max_steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub w_grad_tol: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Newton)]
    pub w_solver: SolverArg,
    /// Sweep only the new column when evaluating a proposal.
    #[arg(long)]
    pub new_column_sweep: bool,
    /// Treat self-links as observed data.
    #[arg(long)]
    pub include_diagonal: bool,
}

impl FitArgs {
    pub fn config(&self) -> Result<FitConfig> {
        let config = FitConfig {
            lambda: self.lambda,
            sigma_w: self.sigma_w,
            k_init: self.k_init,
            max_outer_iters: self.max_iters,
            rel_tol: self.rel_tol,
            w_max_steps: self.w_max_steps,
            w_grad_tol: self.w_grad_tol,
            seed: self.seed,
            births_per_iter: self.births,
            include_diagonal: self.include_diagonal,
            birth_sweep: if self.new_column_sweep { BirthSweep::NewColumnOnly } else { BirthSweep::AllColumns },
            w_solver: match self.w_solver {
                SolverArg::Newton => WSolver::Newton,
                SolverArg::Gradient => WSolver::GradientDescent,
            },
        };
        config.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Mask file of `i j flag` lines (1 = train, 0 = held out).
    #[arg(long, conflicts_with = "train_fraction")]
    pub mask: Option<PathBuf>,
    /// Split the entries at random instead of reading a mask.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Keep (i,j) and (j,i) on the same side; defaults to the graph's symmetry.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub tie_symmetric: Option<bool>,
}

impl SplitArgs {
    /// Train and test masks: from the mask file, from a seeded split, or
    /// every eligible entry for training and nothing held out.
    fn masks(&self, y: &AdjacencyMatrix, seed: u64, config: &FitConfig) -> Result<(ObservationMask, ObservationMask)> {
        if let Some(path) = &self.mask {
            return io::read_mask(path, y.n());
        }
        if let Some(frac) = self.train_fraction {
            let protocol = protocol(y, 1, frac, seed, self.tie_symmetric);
            return experiment::split_for(y, &protocol, seed, config);
        }
        Ok((ObservationMask::full(y.n(), config.include_diagonal), ObservationMask::empty(y.n())))
    }
}

fn protocol(y: &AdjacencyMatrix, splits: usize, train_fraction: f64, base_seed: u64, tie: Option<bool>) -> SplitProtocol {
    SplitProtocol { splits, train_fraction, base_seed, tie_symmetric: tie.unwrap_or_else(|| y.symmetric_hint()) }
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Model JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Write `seconds,heldout_auc` after every iteration (needs held-out entries).
    #[arg(long)]
    pub auc_trace: Option<PathBuf>,
    /// Also write the train/test mask used.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictCmd {
    #[arg(long)]
    pub model: PathBuf,
    /// Pair list, one `i j` per line.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, default_value_t = 5)]
    pub splits: usize,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub tie_symmetric: Option<bool>,
    /// Per-split CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Aggregate JSON; printed to standard output when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Comma-separated candidate values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Per-lambda CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateCmd {
    #[arg(long)]
    pub n: usize,
    /// Feature rate of the nonparametric prior.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_w: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plant this many equal disjoint blocks instead of sampling features.
    #[arg(long)]
    pub planted_blocks: Option<usize>,
    /// Planted within-block weight.
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub within: f64,
    /// Planted across-block weight.
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    pub across: f64,
    /// Dense matrix output.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth JSON; defaults to `<out>.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CommunitiesCmd {
    #[arg(long)]
    pub model: PathBuf,
    /// One node name per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub tie_symmetric: Option<bool>,
    #[arg(long)]
    pub include_diagonal: bool,
    /// Mask output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Truth {
    z: Vec<Vec<u8>>,
    w: Vec<Vec<f64>>,
    seed: u64,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, |w| w.write_all(text.as_bytes())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(cmd) => run_fit(cmd),
        Command::Predict(cmd) => run_predict(cmd),
        Command::Eval(cmd) => run_eval(cmd),
        Command::Cv(cmd) => run_cv(cmd),
        Command::Generate(cmd) => run_generate(cmd),
        Command::Communities(cmd) => run_communities(cmd),
        Command::Split(cmd) => run_split(cmd),
    }
}

fn run_fit(cmd: FitCmd) -> Result<()> {
    let config = cmd.fit.config()?;
    let y = cmd.input.load()?;
    let (train, test) = cmd.split.masks(&y, config.seed, &config)?;
    if train.is_empty() {
        log::warn!("no training entries are observed; only the penalty is minimized");
    }
    let report = match &cmd.auc_trace {
        Some(path) => {
            if test.is_empty() {
                return Err(Error::Usage("--auc-trace needs held-out entries (--mask or --train-fraction)".into()));
            }
            let (report, trace) = experiment::fit_with_auc_trace(&y, &train, &test, &config)?;
            write_atomic(path, |w| experiment::write_trace_csv(&trace, w))?;
            report
        }
        None => fit(&y, &train, &config)?,
    };
    if let Some(path) = &cmd.mask_out {
        write_atomic(path, |w| io::write_mask(&train, &test, w))?;
    }
    ModelFile::from_report(&report, config.seed).write(&cmd.out)?;
    log::info!(
        "K+ = {}, objective = {}, {} iterations, converged = {}",
        report.final_state.k_plus(),
        report.final_objective(),
        report.iterations(),
        report.converged
    );
    Ok(())
}

fn run_predict(cmd: PredictCmd) -> Result<()> {
    let state = ModelFile::read(&cmd.model)?.to_state().map_err(|e| e.in_file(&cmd.model))?;
    let pairs = io::read_pairs(&cmd.input)?;
    let probs = predict_links(&state, &pairs).map_err(|e| Error::from(e).in_file(&cmd.input))?;
    let mut text = String::from("i,j,probability\n");
    for ((i, j), p) in pairs.iter().zip(probs) {
        text.push_str(&format!("{i},{j},{p}\n"));
    }
    write_text(cmd.out.as_deref(), &text)
}

fn run_eval(cmd: EvalCmd) -> Result<()> {
    let config = cmd.fit.config()?;
    if cmd.splits == 0 {
        return Err(Error::Usage("--splits must be at least 1".into()));
    }
    let y = cmd.input.load()?;
    let protocol = protocol(&y, cmd.splits, cmd.train_fraction, config.seed, cmd.tie_symmetric);
    let summary = experiment::run_splits(&y, &protocol, &config)?;
    if let Some(path) = &cmd.out {
        write_atomic(path, |w| experiment::write_eval_csv(&summary.runs, w))?;
    }
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    write_text(cmd.summary.as_deref(), &json)?;
    log::info!("mean AUC {:.4} ± {:.4} over {} splits", summary.mean_auc, summary.std_auc, summary.runs.len());
    Ok(())
}

fn run_cv(cmd: CvCmd) -> Result<()> {
    let config = cmd.fit.config()?;
    let y = cmd.input.load()?;
    let (train, _) = cmd.split.masks(&y, config.seed, &config)?;
    let cv = experiment::cross_validate(&y, &train, &cmd.lambda_grid, cmd.folds, config.seed, &config)?;
    let table = csv_string(|buf| experiment::write_cv_csv(&cv, buf))?;
    if let Some(path) = &cmd.out {
        write_atomic(path, |w| w.write_all(table.as_bytes()))?;
    } else {
        print!("{table}");
    }
    println!("best_lambda={}", cv.best_lambda);
    Ok(())
}

fn run_generate(cmd: GenerateCmd) -> Result<()> {
    if cmd.n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let (z, w, y) = match cmd.planted_blocks {
        Some(blocks) => {
            let z = planted_blocks(cmd.n, blocks)?;
            let w = block_interactions(blocks, cmd.within, cmd.across);
            let y = sample_links(&z, &w, cmd.seed)?;
            (z, w, y)
        }
        None => {
            let s = sample_lfrm(cmd.n, cmd.alpha, cmd.sigma_w, cmd.seed)?;
            (s.z, s.w, s.y)
        }
    };
    let truth_path = cmd.truth.clone().unwrap_or_else(|| {
        let mut name = cmd.out.clone().into_os_string();
        name.push(".truth.json");
        PathBuf::from(name)
    });
    write_atomic(&cmd.out, |out| io::write_dense_matrix(&y, out))?;
    let truth = Truth { z: z.to_rows(), w: w.to_rows(), seed: cmd.seed };
    let json = serde_json::to_string(&truth)? + "\n";
    write_atomic(&truth_path, |out| out.write_all(json.as_bytes()))
}

fn run_communities(cmd: CommunitiesCmd) -> Result<()> {
    let model = ModelFile::read(&cmd.model)?;
    let state = model.to_state().map_err(|e| e.in_file(&cmd.model))?;
    let labels = cmd.labels.as_deref().map(io::read_labels).transpose()?;
    let report = dump_communities(state.z(), labels.as_deref())?;
    write_text(cmd.out.as_deref(), &report)
}

fn run_split(cmd: SplitCmd) -> Result<()> {
    let y = cmd.input.load()?;
    let config = FitConfig { include_diagonal: cmd.include_diagonal, ..FitConfig::default() };
    let protocol = protocol(&y, 1, cmd.train_fraction, cmd.seed, cmd.tie_symmetric);
    let (train, test) = experiment::split_for(&y, &protocol, cmd.seed, &config)?;
    write_atomic(&cmd.out, |w| io::write_mask(&train, &test, w))
}
