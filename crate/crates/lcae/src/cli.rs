//! Command-line front end. Every subcommand reads and writes plain files;
//! identical invocations produce byte-identical CSV output. Progress and
//! timing go to standard error only.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcae_core::baselines::{dct_basis, ista, ista_step, omp, IstaConfig};
use lcae_core::metrics::{class_metrics, nmse, Confusion, NmseReport};
use lcae_core::model::classify_sequence;
use lcae_core::signal::assemble;
use lcae_core::trainer::{train_with, BregmanRule, TrainData};
use lcae_core::{ClassScores, LcaeModel, Mat, NormStats, SensingMatrix};

use crate::config::{parse_rule, RunConfig};
use crate::error::{io_err, Error};
use crate::model_file::{load_model, save_model};
use crate::par::map_columns;
use crate::sensing_file::{load_sensing, save_sensing};
use crate::timing::timing_compare;
use crate::windows_csv::{load_windows_csv, save_windows_csv};

const FORMATS: &str = "\
FILE FORMATS
  Window CSV (input windows, measurements, reconstructions):
      record_id,label,v_1,...,v_k      one window per line, no header
    label is an integer class, -1 for unlabeled. Measurement files use the
    same layout with k = m. Windows sharing a record_id form one sequence.
  Sensing file (text):
      m n d seed                        header
      r_1 ... r_d                       zero-based rows of the ones in column j,
                                        one line per column (n lines)
  Model file (binary, little-endian): magic \"LCAEMODL\", u32 version, u64 n h1
    h2 c, n f64 means, n f64 scales, then W1 (h1 x n+1), W2, W2p, W1p, D, each
    as u64 rows, u64 cols and column-major f64 values.
  Config file: `key = value` per line, `#` comments; unknown keys are errors.
    Command-line flags override config keys.

OUTPUT CSVs (all with a header line)
  NMSE:            record_id,label,nmse
  Predictions:     record_id,true_label,predicted,windows,score_0,...,score_{c-1}
  Class metrics:   metric,class,value   (accuracy; sensitivity/specificity per class)
  Training log:    sweep,objective,reconstruction,label,decoder_penalty,code_penalty,
                   encoder_penalty,wall_ms
  Benchmark:       windows,repetitions,ista_iterations,model_ms,ista_ms,ratio

EXIT CODES
  0 success, 1 usage error, 2 data error";

#[derive(Debug, Parser)]
#[command(
    name = "lcae",
    version,
    about = "Compressed-sensing reconstruction and classification with a label-consistent autoencoder",
    after_long_help = FORMATS
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sparse binary sensing matrix (d ones per column).
    #[command(after_long_help = FORMATS)]
    GenSensing(GenSensingArgs),
    /// Compress clean windows into measurements b = Phi x.
    #[command(after_long_help = FORMATS)]
    Compress(CompressArgs),
    /// Train a model on clean windows compressed with a sensing matrix.
    #[command(after_long_help = FORMATS)]
    Train(TrainArgs),
    /// Reconstruct windows from measurements with a trained model.
    #[command(after_long_help = FORMATS)]
    Reconstruct(ReconstructArgs),
    /// Classify sequences (or single windows) from measurements.
    #[command(after_long_help = FORMATS)]
    Classify(ClassifyArgs),
    /// Reconstruct with orthogonal matching pursuit.
    #[command(after_long_help = FORMATS)]
    BaselineOmp(OmpArgs),
    /// Reconstruct with iterative soft thresholding.
    #[command(after_long_help = FORMATS)]
    BaselineIsta(IstaArgs),
    /// Score reconstructions or predictions against ground truth.
    #[command(after_long_help = FORMATS)]
    Evaluate(EvaluateArgs),
    /// Time model reconstruction against ISTA on the same windows.
    #[command(after_long_help = FORMATS)]
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct GenSensingArgs {
    /// Config file supplying any of: m, n, d, seed, out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of measurements (rows).
    #[arg(long)]
    pub m: Option<usize>,
    /// Window length (columns).
    #[arg(long)]
    pub n: Option<usize>,
    /// Ones per column [default: 2].
    #[arg(long)]
    pub d: Option<usize>,
    /// Generator seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output sensing file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    /// Sensing file.
    #[arg(long)]
    pub phi: PathBuf,
    /// Clean window CSV.
    #[arg(long)]
    pub windows: PathBuf,
    /// Output measurement CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Config file; any flag below overrides the matching key.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training window CSV; label -1 marks unlabeled windows.
    #[arg(long)]
    pub windows: Option<PathBuf>,
    /// Sensing file.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training log CSV (one row per sweep).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Outer hidden layer width.
    #[arg(long)]
    pub h1: Option<usize>,
    /// Inner hidden layer width.
    #[arg(long)]
    pub h2: Option<usize>,
    /// Number of classes [default: 1 + largest label].
    #[arg(long)]
    pub classes: Option<usize>,
    /// Label-consistency weight [default: 1.0].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Decoder-layer penalty weight [default: 0.01].
    #[arg(long)]
    pub mu1: Option<f64>,
    /// Innermost-code penalty weight [default: 0.01].
    #[arg(long)]
    pub mu2: Option<f64>,
    /// First-layer penalty weight [default: 0.01].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Ridge on every closed-form solve [default: 1e-8].
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Clamp applied before inverting the sigmoid [default: 1e-6].
    #[arg(long)]
    pub logit_eps: Option<f64>,
    /// Maximum sweeps [default: 100].
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Relative objective change that stops training [default: 1e-6].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Bregman update: reflected (B <- R - B) or conventional (B <- B - R) [default: reflected].
    #[arg(long, value_parser = parse_rule)]
    pub bregman_rule: Option<BregmanRule>,
    /// Weight initialization seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample rate of the window file in Hz [default: 250].
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Accepted for symmetry with other commands; training runs on one thread.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Clean window CSV, compressed with --phi; enables metrics.
    #[arg(
        long,
        required_unless_present = "measurements",
        conflicts_with = "measurements"
    )]
    pub windows: Option<PathBuf>,
    /// Measurement CSV as written by `compress`.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// Sensing file.
    #[arg(long)]
    pub phi: PathBuf,
    /// Worker threads for the batch (results do not depend on it).
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Output reconstruction CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-window NMSE CSV (requires --windows).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Class metrics CSV over sequences with a known label.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Treat every window as its own sequence.
    #[arg(long)]
    pub per_window: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Basis {
    /// Orthonormal DCT-II atoms.
    Dct,
    /// Recover samples directly.
    Identity,
}

#[derive(Debug, Args)]
pub struct OmpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sparsity (atoms selected per window).
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Sparsifying basis.
    #[arg(long, value_enum, default_value_t = Basis::Dct)]
    pub basis: Basis,
    /// Output reconstruction CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-window NMSE CSV (requires --windows).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IstaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Weight of the l1 term.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Iterations.
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Stop early once the relative objective change is below this; 0 runs every iteration.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    /// Sparsifying basis.
    #[arg(long, value_enum, default_value_t = Basis::Dct)]
    pub basis: Basis,
    /// Output reconstruction CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-window NMSE CSV (requires --windows).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Clean window CSV (NMSE mode).
    #[arg(long, requires = "recon", conflicts_with = "predictions")]
    pub truth: Option<PathBuf>,
    /// Reconstruction CSV, rows in the same order as --truth.
    #[arg(long)]
    pub recon: Option<PathBuf>,
    /// Predictions CSV written by `classify` (class metrics mode).
    #[arg(long, required_unless_present = "truth")]
    pub predictions: Option<PathBuf>,
    /// Output CSV: NMSE rows or class metrics.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Sensing file.
    #[arg(long)]
    pub phi: PathBuf,
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Clean window CSV; the first --batch windows are used.
    #[arg(long)]
    pub windows: PathBuf,
    /// Windows per timed batch.
    #[arg(long, default_value_t = 1)]
    pub batch: usize,
    /// Timed repetitions per method (at least 5).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// ISTA iterations.
    #[arg(long, default_value_t = 2000)]
    pub ista_iters: usize,
    /// ISTA l1 weight.
    #[arg(long, default_value_t = 0.01)]
    pub ista_lambda: f64,
    /// Output timing CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl From<lcae_core::Error> for CliError {
    fn from(e: lcae_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Progress line on standard error, stamped with seconds since start.
struct Progress(Instant);

impl Progress {
    fn say(&self, msg: impl AsRef<str>) {
        eprintln!("[{:8.3}s] {}", self.0.elapsed().as_secs_f64(), msg.as_ref());
    }
}

/// Runs one parsed command; summaries go to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let p = Progress(Instant::now());
    match cli.command {
        Command::GenSensing(a) => gen_sensing(a, &p),
        Command::Compress(a) => compress(a, &p),
        Command::Train(a) => train_cmd(a, &p, stdout),
        Command::Reconstruct(a) => reconstruct(a, &p, stdout),
        Command::Classify(a) => classify(a, &p, stdout),
        Command::BaselineOmp(a) => baseline_omp(a, &p, stdout),
        Command::BaselineIsta(a) => baseline_ista(a, &p, stdout),
        Command::Evaluate(a) => evaluate(a, stdout),
        Command::Benchmark(a) => benchmark(a, &p, stdout),
    }
}

fn load_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn gen_sensing(a: GenSensingArgs, p: &Progress) -> CliResult<()> {
    let file = load_config(&a.config)?;
    let m = a.m.or(file.m).ok_or_else(|| usage("--m is required"))?;
    let n = a.n.or(file.n).ok_or_else(|| usage("--n is required"))?;
    let d =
        a.d.or(file.d)
            .unwrap_or(lcae_core::sensing::DEFAULT_ONES_PER_COL);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let out = a
        .out
        .or(file.out)
        .ok_or_else(|| usage("--out is required"))?;
    let phi = SensingMatrix::generate(m, n, d, seed)?;
    save_sensing(&out, &phi)?;
    p.say(format!(
        "wrote {m}x{n} sensing matrix (d = {d}, seed = {seed}) to {}",
        out.display()
    ));
    Ok(())
}

fn compress(a: CompressArgs, p: &Progress) -> CliResult<()> {
    let phi = load_sensing(&a.phi)?;
    let ws = load_windows_csv(&a.windows, DEFAULT_RATE, None)?;
    let b = phi.compress(&ws.x)?;
    save_windows_csv(&a.out, &ws.source_ids, &ws.labels, &b)?;
    p.say(format!(
        "compressed {} windows to {} measurements each",
        ws.len(),
        phi.m()
    ));
    Ok(())
}

const DEFAULT_RATE: f64 = 250.0;

fn train_cmd(a: TrainArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let flags = RunConfig {
        lambda: a.lambda,
        mu1: a.mu1,
        mu2: a.mu2,
        mu: a.mu,
        ridge: a.ridge,
        logit_eps: a.logit_eps,
        max_sweeps: a.max_sweeps,
        tol: a.tol,
        bregman_rule: a.bregman_rule,
        h1: a.h1,
        h2: a.h2,
        classes: a.classes,
        seed: a.seed,
        sample_rate: a.sample_rate,
        threads: a.threads,
        windows: a.windows,
        phi: a.phi,
        out: a.out,
        log: a.log,
        ..Default::default()
    };
    let cfg = load_config(&a.config)?.overlay(flags);
    let windows = cfg
        .windows
        .clone()
        .ok_or_else(|| usage("--windows is required"))?;
    let phi_path = cfg.phi.clone().ok_or_else(|| usage("--phi is required"))?;
    let out = cfg.out.clone().ok_or_else(|| usage("--out is required"))?;
    if cfg.h1.is_none() || cfg.h2.is_none() {
        return Err(usage("--h1 and --h2 are required"));
    }
    let ws = load_windows_csv(
        &windows,
        cfg.sample_rate.unwrap_or(DEFAULT_RATE),
        cfg.classes,
    )?;
    let phi = load_sensing(&phi_path)?;
    let classes = cfg.classes.unwrap_or_else(|| {
        ws.labels
            .iter()
            .copied()
            .max()
            .map_or(1, |l| (l + 1).max(1) as usize)
    });
    let tc = cfg.train_config(ws.window_len(), classes)?;
    let stats = NormStats::fit(&ws.x)?;
    let ds = assemble(&ws, &phi, &stats, classes)?;
    let data = TrainData::from_dataset(&ds)?;
    p.say(format!(
        "training on {} windows ({} labeled), n = {}, h1 = {}, h2 = {}, c = {}",
        ds.len(),
        ds.n_supervised,
        tc.layer_sizes.n,
        tc.layer_sizes.h1,
        tc.layer_sizes.h2,
        classes
    ));
    let mut log = String::from("sweep,objective,reconstruction,label,decoder_penalty,code_penalty,encoder_penalty,wall_ms\n");
    let mut last = Instant::now();
    let outcome = train_with(&tc, &data, |r| {
        let ms = last.elapsed().as_secs_f64() * 1e3;
        last = Instant::now();
        let t = &r.terms;
        let _ = writeln!(
            log,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:.3}",
            r.sweep + 1,
            t.total(),
            t.reconstruction,
            t.label,
            t.decoder_penalty,
            t.code_penalty,
            t.encoder_penalty,
            ms
        );
    })?;
    save_model(&out, &outcome.model)?;
    if let Some(path) = &cfg.log {
        std::fs::write(path, log)
            .map_err(io_err(path))
            .map_err(CliError::Data)?;
    }
    let h = &outcome.state.objective_history;
    let (first, lastv) = (h[0], h[h.len() - 1]);
    writeln!(
        stdout,
        "sweeps {} converged {} objective_initial {:?} objective_first {:?} objective_final {:?} ratio {:?}",
        h.len(),
        outcome.converged,
        outcome.initial_objective,
        first,
        lastv,
        lastv / first
    )
    .ok();
    p.say(format!("wrote model to {}", out.display()));
    Ok(())
}

/// Measurements plus, when clean windows were given, the truth.
struct Batch {
    ids: Vec<String>,
    labels: Vec<i64>,
    b: Mat,
    truth: Option<Mat>,
}

fn load_batch(input: &InputArgs, phi: &SensingMatrix) -> CliResult<Batch> {
    if let Some(path) = &input.windows {
        let ws = load_windows_csv(path, DEFAULT_RATE, None)?;
        if ws.window_len() != phi.n() {
            return Err(Error::Invalid(format!(
                "{}: windows have {} samples, sensing matrix expects {}",
                path.display(),
                ws.window_len(),
                phi.n()
            ))
            .into());
        }
        let b = phi.compress(&ws.x)?;
        Ok(Batch {
            ids: ws.source_ids,
            labels: ws.labels,
            b,
            truth: Some(ws.x),
        })
    } else {
        let path = input
            .measurements
            .as_ref()
            .expect("clap enforces one input");
        let ms = load_windows_csv(path, DEFAULT_RATE, None)?;
        if ms.window_len() != phi.m() {
            return Err(Error::Invalid(format!(
                "{}: measurements have {} values, sensing matrix produces {}",
                path.display(),
                ms.window_len(),
                phi.m()
            ))
            .into());
        }
        Ok(Batch {
            ids: ms.source_ids,
            labels: ms.labels,
            b: ms.x,
            truth: None,
        })
    }
}

fn check_model(model: &LcaeModel, phi: &SensingMatrix) -> CliResult<()> {
    if model.sizes().n != phi.n() {
        return Err(Error::Invalid(format!(
            "model expects windows of {} samples, sensing matrix has n = {}",
            model.sizes().n,
            phi.n()
        ))
        .into());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(io_err(path))
        .map_err(CliError::Data)
}

fn nmse_csv(ids: &[String], labels: &[i64], r: &NmseReport) -> String {
    let mut s = String::from("record_id,label,nmse\n");
    for ((id, l), v) in ids.iter().zip(labels).zip(&r.per_column) {
        let _ = writeln!(s, "{id},{l},{v:?}");
    }
    s
}

/// Writes the reconstruction, and NMSE against the truth when available.
fn finish_reconstruction(
    batch: &Batch,
    recon: &Mat,
    out: &Path,
    metrics: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    save_windows_csv(out, &batch.ids, &batch.labels, recon)?;
    match (&batch.truth, metrics) {
        (Some(truth), m) => {
            let r = nmse(truth, recon)?;
            if let Some(path) = m {
                write_file(path, &nmse_csv(&batch.ids, &batch.labels, &r))?;
            }
            writeln!(
                stdout,
                "nmse_mean {:?} nmse_std {:?} windows {}",
                r.mean,
                r.std,
                r.per_column.len()
            )
            .ok();
        }
        (None, Some(_)) => return Err(usage("--metrics needs --windows (clean ground truth)")),
        (None, None) => {}
    }
    Ok(())
}

fn reconstruct(a: ReconstructArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let phi = load_sensing(&a.input.phi)?;
    let model = load_model(&a.model)?;
    check_model(&model, &phi)?;
    let batch = load_batch(&a.input, &phi)?;
    let recon = map_columns(a.input.threads, &batch.b, |b| {
        Ok(model.reconstruct(&phi, b)?)
    })?;
    p.say(format!("reconstructed {} windows", recon.cols()));
    finish_reconstruction(&batch, &recon, &a.out, &a.metrics, stdout)
}

fn classify(a: ClassifyArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let phi = load_sensing(&a.input.phi)?;
    let model = load_model(&a.model)?;
    check_model(&model, &phi)?;
    let batch = load_batch(&a.input, &phi)?;
    let c = model.sizes().c;
    let scores = map_columns(a.input.threads, &batch.b, |b| {
        let xin = model.norm_stats().apply(&phi.adjoint(b)?)?;
        Ok(model.predict_scores(&xin)?.scores)
    })?;

    // groups in order of first appearance
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    if a.per_window {
        groups = (0..batch.ids.len())
            .map(|i| (batch.ids[i].clone(), vec![i]))
            .collect();
    } else {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, id) in batch.ids.iter().enumerate() {
            let g = *index.entry(id).or_insert_with(|| {
                groups.push((id.clone(), Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(i);
        }
    }

    let mut csv = String::from("record_id,true_label,predicted,windows");
    for k in 0..c {
        let _ = write!(csv, ",score_{k}");
    }
    csv.push('\n');
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    for (id, cols) in &groups {
        let s = ClassScores {
            scores: scores.select_cols(cols),
        };
        let pred = classify_sequence(&s)?;
        let first = batch.labels[cols[0]];
        let label = if cols.iter().all(|&i| batch.labels[i] == first) {
            first
        } else {
            -1
        };
        let _ = write!(csv, "{id},{label},{pred},{}", cols.len());
        for k in 0..c {
            let mean = s.scores.row(k).iter().sum::<f64>() / cols.len() as f64;
            let _ = write!(csv, ",{mean:?}");
        }
        csv.push('\n');
        if label >= 0 && (label as usize) < c {
            truth.push(label as usize);
            predicted.push(pred);
        }
    }
    write_file(&a.out, &csv)?;
    p.say(format!(
        "classified {} sequences from {} windows",
        groups.len(),
        batch.ids.len()
    ));
    if !truth.is_empty() {
        let conf = Confusion::from_predictions(&truth, &predicted, c)?;
        let text = class_metrics_csv(&conf)?;
        if let Some(path) = &a.metrics {
            write_file(path, &text)?;
        }
        writeln!(
            stdout,
            "accuracy {:?} sequences {}",
            conf.trace() as f64 / conf.total() as f64,
            conf.total()
        )
        .ok();
    } else if a.metrics.is_some() {
        return Err(
            Error::Invalid("no sequence has a known label; cannot compute metrics".into()).into(),
        );
    }
    Ok(())
}

fn class_metrics_csv(conf: &Confusion) -> CliResult<String> {
    let m = class_metrics(conf)?;
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    let mut s = String::from("metric,class,value\n");
    let _ = writeln!(s, "accuracy,,{:?}", m.accuracy);
    for (k, st) in m.per_class.iter().enumerate() {
        let _ = writeln!(s, "sensitivity,{k},{:?}", st.sensitivity);
        let _ = writeln!(s, "specificity,{k},{:?}", st.specificity);
    }
    Ok(s)
}

/// Effective operator `Φ Ψ` and synthesis basis `Ψ`.
fn dictionary(phi: &SensingMatrix, basis: Basis) -> CliResult<(Mat, Mat)> {
    let psi = match basis {
        Basis::Dct => dct_basis(phi.n()),
        Basis::Identity => Mat::identity(phi.n()),
    };
    Ok((phi.compress(&psi)?, psi))
}

fn baseline_omp(a: OmpArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let phi = load_sensing(&a.input.phi)?;
    let batch = load_batch(&a.input, &phi)?;
    let (op, psi) = dictionary(&phi, a.basis)?;
    let recon = map_columns(a.input.threads, &batch.b, |b| {
        let mut cols = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            let r = omp(&op, b.col(j), a.k)?;
            cols.push(psi.matmul(&Mat::column_vector(&r.x))?.into_vec());
        }
        Ok(columns_or_empty(&cols, phi.n()))
    })?;
    p.say(format!(
        "OMP (k = {}) reconstructed {} windows",
        a.k,
        recon.cols()
    ));
    finish_reconstruction(&batch, &recon, &a.out, &a.metrics, stdout)
}

fn baseline_ista(a: IstaArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let phi = load_sensing(&a.input.phi)?;
    let batch = load_batch(&a.input, &phi)?;
    let (op, psi) = dictionary(&phi, a.basis)?;
    let cfg = IstaConfig {
        lambda: a.lambda,
        max_iters: a.iters,
        tol: a.tol,
        step: Some(ista_step(&op)?),
        record_objective: false,
    };
    let recon = map_columns(a.input.threads, &batch.b, |b| {
        let mut cols = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            let r = ista(&op, b.col(j), &cfg)?;
            cols.push(psi.matmul(&Mat::column_vector(&r.x))?.into_vec());
        }
        Ok(columns_or_empty(&cols, phi.n()))
    })?;
    p.say(format!(
        "ISTA ({} iterations) reconstructed {} windows",
        a.iters,
        recon.cols()
    ));
    finish_reconstruction(&batch, &recon, &a.out, &a.metrics, stdout)
}

fn columns_or_empty(cols: &[Vec<f64>], rows: usize) -> Mat {
    if cols.is_empty() {
        Mat::zeros(rows, 0)
    } else {
        Mat::from_columns(cols).expect("equal-length columns")
    }
}

fn evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if let Some(pred) = &a.predictions {
        let (truth, predicted, c) = read_predictions(pred)?;
        if truth.is_empty() {
            return Err(
                Error::Invalid(format!("{}: no rows with a known label", pred.display())).into(),
            );
        }
        let conf = Confusion::from_predictions(&truth, &predicted, c)?;
        write_file(&a.out, &class_metrics_csv(&conf)?)?;
        writeln!(
            stdout,
            "accuracy {:?} sequences {}",
            conf.trace() as f64 / conf.total() as f64,
            conf.total()
        )
        .ok();
        return Ok(());
    }
    let (truth_path, recon_path) = (a.truth.expect("clap"), a.recon.expect("clap"));
    let t = load_windows_csv(&truth_path, DEFAULT_RATE, None)?;
    let r = load_windows_csv(&recon_path, DEFAULT_RATE, None)?;
    if t.source_ids != r.source_ids {
        return Err(Error::Invalid(
            "truth and reconstruction list different record ids (or orders)".into(),
        )
        .into());
    }
    let report = nmse(&t.x, &r.x)?;
    write_file(&a.out, &nmse_csv(&t.source_ids, &t.labels, &report))?;
    writeln!(
        stdout,
        "nmse_mean {:?} nmse_std {:?} windows {}",
        report.mean,
        report.std,
        report.per_column.len()
    )
    .ok();
    Ok(())
}

/// `(true, predicted, classes)` from a predictions CSV, skipping rows whose
/// true label is unknown.
fn read_predictions(path: &Path) -> CliResult<(Vec<usize>, Vec<usize>, usize)> {
    let bad = |line: u64, msg: &str| CliError::Data(crate::error::parse_err(path, line, msg));
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| CliError::Data(crate::error::format_err(path, e.to_string())))?;
    let headers = rdr.headers().map_err(|e| bad(1, &e.to_string()))?.clone();
    if headers.get(0) != Some("record_id")
        || headers.get(1) != Some("true_label")
        || headers.get(2) != Some("predicted")
    {
        return Err(bad(
            1,
            "expected a predictions header (record_id,true_label,predicted,...)",
        ));
    }
    let c = headers.iter().filter(|h| h.starts_with("score_")).count();
    let (mut truth, mut pred) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), &e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let t: i64 = rec[1]
            .parse()
            .map_err(|_| bad(line, "true_label is not an integer"))?;
        let q: usize = rec[2]
            .parse()
            .map_err(|_| bad(line, "predicted is not a class index"))?;
        if t >= 0 {
            truth.push(t as usize);
            pred.push(q);
        }
    }
    Ok((truth, pred, c))
}

fn benchmark(a: BenchmarkArgs, p: &Progress, stdout: &mut dyn Write) -> CliResult<()> {
    let phi = load_sensing(&a.phi)?;
    let model = load_model(&a.model)?;
    check_model(&model, &phi)?;
    let ws = load_windows_csv(&a.windows, DEFAULT_RATE, None)?;
    let count = a.batch.min(ws.len());
    let b = phi.compress(&ws.x.cols_range(0, count))?;
    let (op, psi) = dictionary(&phi, Basis::Dct)?;
    let cfg = IstaConfig {
        lambda: a.ista_lambda,
        max_iters: a.ista_iters,
        tol: 0.0,
        step: Some(ista_step(&op)?),
        record_objective: false,
    };
    let ista_batch = |b: &Mat| -> lcae_core::Result<Mat> {
        let mut out = Mat::zeros(psi.rows(), b.cols());
        for j in 0..b.cols() {
            let r = ista(&op, b.col(j), &cfg)?;
            out.col_mut(j)
                .copy_from_slice(psi.matmul(&Mat::column_vector(&r.x))?.as_slice());
        }
        Ok(out)
    };
    let report = timing_compare(
        |b: &Mat| model.reconstruct(&phi, b).map(|_| ()),
        |b: &Mat| ista_batch(b).map(|_| ()),
        &b,
        a.reps,
    )?;
    let text = format!(
        "windows,repetitions,ista_iterations,model_ms,ista_ms,ratio\n{count},{},{},{:?},{:?},{:?}\n",
        report.repetitions, a.ista_iters, report.ms_a, report.ms_b, report.ratio
    );
    write_file(&a.out, &text)?;
    p.say(format!(
        "model {:.4} ms, ISTA {:.3} ms per batch of {count}",
        report.ms_a, report.ms_b
    ));
    writeln!(stdout, "ratio {:?}", report.ratio).ok();
    Ok(())
}
