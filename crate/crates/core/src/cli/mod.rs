//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.

pub mod experiments;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::data::{
    gen_mask, image_to_tensor, is_image_path, read_mask, read_tensor, tensor_to_image, write_tensor, RngSeed,
    SamplingMask,
};
use crate::error::{Error, Result};
use crate::metrics::{normalized_recovery_error, MetricReport};
use crate::solver::{solve_observed, IterRecord, SolverConfig, SolverTrace};
use crate::talg::{Dims, Tensor3};
use experiments::{csv_err, run_experiment, summarize, write_summary, write_trace, write_trials};
pub use experiments::{ExperimentKind, ExperimentSpec};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ptnn", version, about = "Low-rank tensor completion with p-shrinkage tensor nuclear norms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complete one tensor or RGB image.
    Complete(CompleteArgs),
    /// Recovery error against p on one instance.
    PSweep(SweepArgs),
    /// Recovery error against sampling rate for cubes of growing size.
    SizeSweep(SweepArgs),
    /// Recovery error against sampling rate for growing depth I3.
    DepthSweep(SweepArgs),
    /// Success fraction (PSNR > 32 dB) over tubal rank and sampling rate.
    PhaseDiagram(SweepArgs),
    /// RSE, PSNR and SSIM of an estimate against ground truth.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Regularization weight; scaled to the data when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Multiple of beta0 times the spectral norm of the observation used
    /// for lambda when --lambda is omitted.
    #[arg(long)]
    pub lambda_scale: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            p: self.p.unwrap_or(d.p),
            lambda: self.lambda.or(d.lambda),
            lambda_scale: self.lambda_scale.unwrap_or(d.lambda_scale),
            beta0: self.beta0.unwrap_or(d.beta0),
            beta_max: self.beta_max.unwrap_or(d.beta_max),
            eta: self.eta.unwrap_or(d.eta),
            gamma0: self.gamma0.unwrap_or(d.gamma0),
            rho: self.rho.unwrap_or(d.rho),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompleteArgs {
    /// Tensor file, or a .ppm/.png image.
    #[arg(long)]
    pub input: PathBuf,
    /// Mask file; alternatively sample one with --sr.
    #[arg(long, conflicts_with = "sr", required_unless_present = "sr")]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub sr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground truth for the metric columns; images are their own truth.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Recovered tensor file. Image inputs also get an image next to it.
    #[arg(long)]
    pub recovered: PathBuf,
    /// CSV report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Use the published grid sizes instead of the reduced defaults.
    #[arg(long)]
    pub paper_scale: bool,
    /// Tensor sizes as I1xI2xI3, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_dims)]
    pub dims: Option<Vec<Dims>>,
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub srs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-trial CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell summary CSV; stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected I1xI2xI3, got {s:?}"));
    }
    let mut d = [0; 3];
    for (slot, part) in d.iter_mut().zip(parts) {
        *slot = part.trim().parse().map_err(|_| format!("bad dimension {part:?}"))?;
    }
    Ok(d)
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::param(format!("input file {} does not exist", path.display())))
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(path: &Path) -> Result<Tensor3> {
    if is_image_path(path) {
        image_to_tensor(path)
    } else {
        read_tensor(path)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const COMPLETE_HEADER: [&str; 24] = [
    "input", "mask", "sr", "seed", "n1", "n2", "n3", "p", "lambda", "beta0", "beta_max", "eta", "gamma0", "rho",
    "max_iters", "tol", "iterations", "converged", "final_f", "wall_ms", "observed", "rse", "psnr", "ssim",
];

/// Result of a `complete` run.
#[derive(Debug, Clone)]
pub struct CompleteOutcome {
    pub recovered: Tensor3,
    pub trace: SolverTrace,
    pub report: Option<MetricReport>,
}

pub fn run_complete(args: &CompleteArgs) -> Result<CompleteOutcome> {
    require_file(&args.input)?;
    if let Some(m) = &args.mask {
        require_file(m)?;
    }
    if let Some(t) = &args.truth {
        require_file(t)?;
    }
    let cfg = args.solver.config();
    cfg.validate()?;

    let image_input = is_image_path(&args.input);
    let input = load(&args.input)?;
    let mask = match (&args.mask, args.sr) {
        (Some(path), _) => read_mask(path)?,
        (None, Some(sr)) => gen_mask(input.dims(), sr, RngSeed(args.seed))?,
        (None, None) => return Err(Error::param("either --mask or --sr is required")),
    };
    if mask.dims() != input.dims() {
        return Err(Error::dims(format!("mask {:?} vs input {:?}", mask.dims(), input.dims())));
    }
    let truth = match &args.truth {
        Some(p) => Some(load(p)?),
        None if image_input => Some(input.clone()),
        None => None,
    };
    if let Some(t) = &truth {
        t.check_same_dims(&input, "truth")?;
    }

    let start = Instant::now();
    let mut records: Vec<(IterRecord, Option<f64>)> = Vec::new();
    let (x, trace) = solve_observed(&input, &mask, &cfg, |rec, x| {
        let err = truth.as_ref().and_then(|t| normalized_recovery_error(t, x).ok());
        records.push((*rec, err));
    })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let report = truth.as_ref().map(|t| MetricReport::compute(t, &x)).transpose()?;

    write_tensor(&args.recovered, &x)?;
    if image_input {
        tensor_to_image(&x, args.recovered.with_extension("ppm"))?;
    }
    if let Some(path) = &args.trace {
        write_trace(File::create(path)?, [(0, None, records.as_slice())])?;
    }
    write_complete_row(sink(args.out.as_deref())?, args, &cfg, &mask, &x, &trace, wall_ms, report.as_ref())?;
    Ok(CompleteOutcome { recovered: x, trace, report })
}

#[allow(clippy::too_many_arguments)]
fn write_complete_row(
    w: impl Write,
    args: &CompleteArgs,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    x: &Tensor3,
    trace: &SolverTrace,
    wall_ms: f64,
    report: Option<&MetricReport>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COMPLETE_HEADER).map_err(csv_err)?;
    let [n1, n2, n3] = x.dims();
    let final_f = trace.records.last().map(|r| r.f_value);
    let row = [
        args.input.display().to_string(),
        args.mask.as_ref().map(|m| m.display().to_string()).unwrap_or_default(),
        fmt_opt(args.sr),
        args.seed.to_string(),
        n1.to_string(),
        n2.to_string(),
        n3.to_string(),
        cfg.p.to_string(),
        trace.lambda.to_string(),
        cfg.beta0.to_string(),
        cfg.beta_max.to_string(),
        cfg.eta.to_string(),
        cfg.gamma0.to_string(),
        cfg.rho.to_string(),
        cfg.max_iters.to_string(),
        cfg.tol.to_string(),
        trace.iterations().to_string(),
        trace.converged().to_string(),
        fmt_opt(final_f),
        format!("{wall_ms:.3}"),
        mask.len().to_string(),
        fmt_opt(report.map(|r| r.rse)),
        fmt_opt(report.map(|r| r.psnr)),
        fmt_opt(report.and_then(|r| r.ssim)),
    ];
    out.write_record(row).map_err(csv_err)?;
    out.flush()?;
    Ok(())
}

/// The experiment a sweep subcommand runs, with overrides applied.
pub fn sweep_spec(kind: ExperimentKind, args: &SweepArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::defaults(kind, args.paper_scale);
    if let Some(d) = &args.dims {
        spec.dims = d.clone();
    }
    if let Some(r) = &args.ranks {
        spec.ranks = r.clone();
    }
    if let Some(s) = &args.srs {
        spec.srs = s.clone();
    }
    if let Some(p) = &args.ps {
        spec.ps = p.clone();
    }
    spec.trials = args.trials;
    spec.seed = args.seed;
    spec.solver = args.solver.config();
    if args.solver.p.is_some() && args.ps.is_none() && kind != ExperimentKind::PSweep {
        spec.ps = vec![spec.solver.p];
    }
    spec
}

pub fn run_sweep(kind: ExperimentKind, args: &SweepArgs) -> Result<()> {
    let spec = sweep_spec(kind, args);
    spec.validate()?;
    let results = run_experiment(&spec, args.trace.is_some())?;
    write_trials(sink(args.out.as_deref())?, kind, &results)?;
    write_summary(sink(args.summary.as_deref())?, &summarize(&results))?;
    if let Some(path) = &args.trace {
        let runs = results.iter().map(|r| (r.trial, Some(r.cell), r.trace.as_slice()));
        write_trace(File::create(path)?, runs)?;
    }
    Ok(())
}

pub const METRICS_HEADER: [&str; 5] = ["truth", "estimate", "rse", "psnr", "ssim"];

pub fn report_metrics(args: &MetricsArgs) -> Result<MetricReport> {
    require_file(&args.truth)?;
    require_file(&args.estimate)?;
    let truth = load(&args.truth)?;
    let estimate = load(&args.estimate)?;
    let report = MetricReport::compute(&truth, &estimate)?;
    let mut out = csv::Writer::from_writer(sink(args.out.as_deref())?);
    out.write_record(METRICS_HEADER).map_err(csv_err)?;
    out.write_record([
        args.truth.display().to_string(),
        args.estimate.display().to_string(),
        report.rse.to_string(),
        report.psnr.to_string(),
        fmt_opt(report.ssim),
    ])
    .map_err(csv_err)?;
    out.flush()?;
    Ok(report)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Complete(a) => run_complete(a).map(|_| ()),
        Command::PSweep(a) => run_sweep(ExperimentKind::PSweep, a),
        Command::SizeSweep(a) => run_sweep(ExperimentKind::SizeSweep, a),
        Command::DepthSweep(a) => run_sweep(ExperimentKind::DepthSweep, a),
        Command::PhaseDiagram(a) => run_sweep(ExperimentKind::PhaseDiagram, a),
        Command::Metrics(a) => report_metrics(a).map(|_| ()),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_io() {
        EXIT_IO
    } else {
        EXIT_USAGE
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
