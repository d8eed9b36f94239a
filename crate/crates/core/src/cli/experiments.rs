//! Synthetic completion experiments over grids of size, rank, sampling rate
//! and `p`, with CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{gen_lowrank, gen_mask, RngSeed};
use crate::error::{Error, Result};
use crate::metrics::{normalized_recovery_error, psnr, rse};
use crate::solver::{solve_observed, IterRecord, SolverConfig};
use crate::talg::Dims;

/// PSNR above which a trial counts as a successful recovery.
pub const SUCCESS_PSNR_DB: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PSweep,
    SizeSweep,
    DepthSweep,
    PhaseDiagram,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::PSweep => "p-sweep",
            Self::SizeSweep => "size-sweep",
            Self::DepthSweep => "depth-sweep",
            Self::PhaseDiagram => "phase-diagram",
        }
    }
}

/// A full factorial grid `dims x ranks x srs x ps`, each cell repeated
/// `trials` times.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dims: Vec<Dims>,
    pub ranks: Vec<usize>,
    pub srs: Vec<f64>,
    pub ps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

/// `-2.0, -1.9, ..., 0.9`.
pub fn default_p_grid() -> Vec<f64> {
    (-20..=9).map(|i| i as f64 / 10.0).collect()
}

/// `0.05, 0.10, ..., 0.50`.
pub fn default_sr_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.05).collect()
}

impl ExperimentSpec {
    /// Defaults at half the published dimensions, or the published ones
    /// with `paper_scale`.
    pub fn defaults(kind: ExperimentKind, paper_scale: bool) -> Self {
        fn pick<T>(paper_scale: bool, desk: T, paper: T) -> T {
            if paper_scale { paper } else { desk }
        }
        let (dims, ranks, srs, ps) = match kind {
            ExperimentKind::PSweep => (
                vec![pick(paper_scale, [50, 50, 10], [100, 100, 20])],
                vec![pick(paper_scale, 3, 5)],
                vec![0.2],
                default_p_grid(),
            ),
            ExperimentKind::SizeSweep => (
                pick(paper_scale, vec![25, 50, 75, 100], vec![50, 100, 150, 200]).into_iter().map(|n| [n, n, n]).collect(),
                vec![5],
                default_sr_grid(),
                vec![-1.0],
            ),
            ExperimentKind::DepthSweep => {
                let n = pick(paper_scale, 50, 100);
                (
                    pick(paper_scale, vec![10, 20, 30, 40, 50], vec![20, 40, 60, 80, 100]).into_iter().map(|d| [n, n, d]).collect(),
                    vec![5],
                    default_sr_grid(),
                    vec![-1.0],
                )
            }
            ExperimentKind::PhaseDiagram => (
                vec![pick(paper_scale, [50, 50, 10], [100, 100, 20])],
                pick(paper_scale, vec![2, 4, 6, 8, 10, 12], vec![10, 16, 22, 28, 34, 40]),
                pick(paper_scale, vec![0.05, 0.14, 0.23, 0.32, 0.41, 0.5], default_sr_grid()),
                vec![-1.0],
            ),
        };
        Self { kind, dims, ranks, srs, ps, trials: 3, seed: 0, solver: SolverConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.ranks.is_empty() || self.srs.is_empty() || self.ps.is_empty() {
            return Err(Error::param("every sweep axis needs at least one value"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if let Some(d) = self.dims.iter().find(|d| d.contains(&0)) {
            return Err(Error::param(format!("zero dimension in {d:?}")));
        }
        for &p in &self.ps {
            SolverConfig { p, ..self.solver }.validate()?;
        }
        Ok(())
    }

    /// Grid cells in output order: dims, then rank, then sr, then p.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &dims in &self.dims {
            for &rank in &self.ranks {
                for &sr in &self.srs {
                    for &p in &self.ps {
                        out.push(Cell { dims, rank, sr, p });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub dims: Dims,
    pub rank: usize,
    pub sr: f64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub cell: Cell,
    pub trial: usize,
    pub seed: u64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rse: f64,
    pub psnr: f64,
    pub wall_ms: f64,
    /// Per-iteration records with the mean squared error to the truth.
    pub trace: Vec<(IterRecord, Option<f64>)>,
}

/// One completion on a freshly generated instance. Tensor and mask share
/// `seed`, drawn from separate streams.
pub fn run_trial(cell: Cell, trial: usize, seed: u64, solver: &SolverConfig, keep_trace: bool) -> Result<TrialResult> {
    let rng_seed = RngSeed(seed);
    let truth = gen_lowrank(cell.dims, cell.rank, rng_seed)?;
    let mask = gen_mask(cell.dims, cell.sr, rng_seed)?;
    let obs = mask.project(&truth)?;
    let cfg = SolverConfig { p: cell.p, ..*solver };
    let start = Instant::now();
    let mut trace = Vec::new();
    let (x, st) = solve_observed(&obs, &mask, &cfg, |rec, x| {
        if keep_trace {
            trace.push((*rec, normalized_recovery_error(&truth, x).ok()));
        }
    })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialResult {
        cell,
        trial,
        seed,
        lambda: st.lambda,
        iterations: st.iterations(),
        converged: st.converged(),
        rse: rse(&truth, &x)?,
        psnr: psnr(&truth, &x)?,
        wall_ms,
        trace,
    })
}

/// Every (cell, trial) pair, run in parallel and returned in grid order.
pub fn run_experiment(spec: &ExperimentSpec, keep_trace: bool) -> Result<Vec<TrialResult>> {
    spec.validate()?;
    let jobs: Vec<(Cell, usize)> =
        spec.cells().into_iter().flat_map(|c| (0..spec.trials).map(move |t| (c, t))).collect();
    jobs.into_par_iter()
        .map(|(cell, t)| run_trial(cell, t, spec.seed.wrapping_add(t as u64), &spec.solver, keep_trace))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: usize,
    pub mean_rse: f64,
    pub mean_psnr: f64,
    pub successes: usize,
}

impl CellSummary {
    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Per-cell means, in order of first appearance.
pub fn summarize(results: &[TrialResult]) -> Vec<CellSummary> {
    let mut order: Vec<Cell> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<&TrialResult>> = BTreeMap::new();
    for r in results {
        let idx = match order.iter().position(|c| *c == r.cell) {
            Some(i) => i,
            None => {
                order.push(r.cell);
                order.len() - 1
            }
        };
        groups.entry(idx).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(i, rs)| {
            let n = rs.len() as f64;
            CellSummary {
                cell: order[i],
                trials: rs.len(),
                mean_rse: rs.iter().map(|r| r.rse).sum::<f64>() / n,
                mean_psnr: rs.iter().map(|r| r.psnr).sum::<f64>() / n,
                successes: rs.iter().filter(|r| r.psnr > SUCCESS_PSNR_DB).count(),
            }
        })
        .collect()
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn cell_fields(c: &Cell) -> [String; 6] {
    [c.dims[0].to_string(), c.dims[1].to_string(), c.dims[2].to_string(), c.rank.to_string(), f(c.sr), f(c.p)]
}

pub const TRIAL_HEADER: [&str; 15] = [
    "kind", "n1", "n2", "n3", "rank", "sr", "p", "trial", "seed", "lambda", "iterations", "converged", "rse",
    "psnr", "wall_ms",
];

pub fn write_trials(w: impl Write, kind: ExperimentKind, results: &[TrialResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIAL_HEADER).map_err(csv_err)?;
    for r in results {
        let mut row = vec![kind.name().to_string()];
        row.extend(cell_fields(&r.cell));
        row.extend([
            r.trial.to_string(),
            r.seed.to_string(),
            f(r.lambda),
            r.iterations.to_string(),
            r.converged.to_string(),
            f(r.rse),
            f(r.psnr),
            format!("{:.3}", r.wall_ms),
        ]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 11] =
    ["n1", "n2", "n3", "rank", "sr", "p", "trials", "mean_rse", "mean_psnr", "successes", "success_fraction"];

pub fn write_summary(w: impl Write, summary: &[CellSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in summary {
        let mut row: Vec<String> = cell_fields(&s.cell).into();
        row.extend([
            s.trials.to_string(),
            f(s.mean_rse),
            f(s.mean_psnr),
            s.successes.to_string(),
            f(s.success_fraction()),
        ]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub const TRACE_HEADER: [&str; 14] = [
    "trial", "n1", "n2", "n3", "rank", "sr", "p", "iter", "f_value", "step_norm", "rel_change", "gamma", "beta",
    "momentum_accepted",
];

/// Per-iteration records of one run; the cell columns are left empty when
/// `cell` is `None`. `recovery_error` is appended when known.
pub fn write_trace<'a>(
    w: impl Write,
    runs: impl IntoIterator<Item = (usize, Option<Cell>, &'a [(IterRecord, Option<f64>)])>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = TRACE_HEADER.into();
    header.push("recovery_error");
    out.write_record(&header).map_err(csv_err)?;
    for (trial, cell, recs) in runs {
        let cf = cell.map(|c| cell_fields(&c)).unwrap_or_default();
        for (r, err) in recs {
            let mut row = vec![trial.to_string()];
            row.extend(cf.iter().cloned());
            row.extend([
                r.iter.to_string(),
                f(r.f_value),
                f(r.step_norm),
                r.rel_change.map(f).unwrap_or_default(),
                f(r.gamma),
                f(r.beta),
                r.momentum_accepted.to_string(),
                err.map(f).unwrap_or_default(),
            ]);
            out.write_record(&row).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            dims: vec![[8, 8, 3]],
            ranks: vec![1, 2],
            srs: vec![0.5],
            ps: vec![-1.0, 0.5],
            trials: 2,
            seed: 9,
            solver: SolverConfig { max_iters: 40, ..SolverConfig::default() },
        }
    }

    #[test]
    fn grids() {
        let g = default_p_grid();
        assert_eq!(g.len(), 30);
        assert_eq!((g[0], g[10], g[29]), (-2.0, -1.0, 0.9));
        let s = default_sr_grid();
        assert_eq!(s.len(), 10);
        assert!((s[9] - 0.5).abs() < 1e-15);
        for kind in [ExperimentKind::PSweep, ExperimentKind::SizeSweep, ExperimentKind::DepthSweep, ExperimentKind::PhaseDiagram] {
            ExperimentSpec::defaults(kind, false).validate().unwrap();
            ExperimentSpec::defaults(kind, true).validate().unwrap();
        }
        assert_eq!(ExperimentSpec::defaults(ExperimentKind::PSweep, true).dims, vec![[100, 100, 20]]);
    }

    #[test]
    fn results_follow_grid_order() {
        let spec = tiny(ExperimentKind::PSweep);
        let rs = run_experiment(&spec, false).unwrap();
        assert_eq!(rs.len(), 8);
        let cells = spec.cells();
        for (i, r) in rs.iter().enumerate() {
            assert_eq!(r.cell, cells[i / 2]);
            assert_eq!(r.trial, i % 2);
            assert_eq!(r.seed, 9 + (i % 2) as u64);
        }
        let sum = summarize(&rs);
        assert_eq!(sum.len(), 4);
        assert!(sum.iter().all(|s| s.trials == 2));
    }

    #[test]
    fn invalid_specs() {
        let mut s = tiny(ExperimentKind::PhaseDiagram);
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = tiny(ExperimentKind::PhaseDiagram);
        s.srs.clear();
        assert!(s.validate().is_err());
        let mut s = tiny(ExperimentKind::PhaseDiagram);
        s.ps = vec![2.0];
        assert!(s.validate().is_err());
    }
}
