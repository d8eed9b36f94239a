//! Low-rank tensor completion by ADMM with adaptive momentum.
//!
//! Minimizes `F(X) = 1/2 ||P_Omega(X - T)||_F^2 + lambda ||X||_p` subject to
//! the observed entries, where `||.||_p` is the p-shrinkage tensor nuclear
//! norm (the plain TNN at `p = 1`). Each iteration extrapolates the primal
//! iterate when that does not increase `F`, applies t-GSVT, reinstalls the
//! observations, and updates the multiplier and penalty.
//!
//! The shrinkage weight is tied to the prox step through its zero-crossing:
//! at penalty `beta` the threshold is `tau = lambda / beta` and
//! `mu = tau^(2 - p)`, so singular values below `tau` are removed for every
//! `p`.

use crate::data::SamplingMask;
use crate::error::{Error, Result};
use crate::shrink::ShrinkParams;
use crate::talg::{singular_spectrum, tgsvt, Tensor3};

/// Default for [`SolverConfig::lambda_scale`].
pub const DEFAULT_LAMBDA_SCALE: f64 = 1.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    /// Regularization weight; `None` scales it to the data, see
    /// [`default_lambda`].
    pub lambda: Option<f64>,
    /// Multiple of `beta0 * ||P_Omega(T)||_2` used when `lambda` is `None`.
    pub lambda_scale: f64,
    pub beta0: f64,
    pub beta_max: f64,
    pub eta: f64,
    pub gamma0: f64,
    pub rho: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: -1.0,
            lambda: None,
            lambda_scale: DEFAULT_LAMBDA_SCALE,
            beta0: 0.01,
            beta_max: 1e5,
            eta: 1.1,
            gamma0: 0.1,
            rho: 2.0,
            max_iters: 1000,
            tol: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        if !self.p.is_finite() || self.p > 1.0 {
            return Err(Error::param(format!("p must be finite and <= 1, got {}", self.p)));
        }
        if let Some(l) = self.lambda {
            positive("lambda", l)?;
        }
        positive("lambda_scale", self.lambda_scale)?;
        positive("beta0", self.beta0)?;
        positive("beta_max", self.beta_max)?;
        positive("tol", self.tol)?;
        if self.beta_max < self.beta0 {
            return Err(Error::param("beta_max must be >= beta0"));
        }
        if !(self.eta.is_finite() && self.eta > 1.0) {
            return Err(Error::param(format!("eta must be > 1, got {}", self.eta)));
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return Err(Error::param(format!("rho must be > 1, got {}", self.rho)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0) {
            return Err(Error::param(format!("gamma0 must be in (0, 1], got {}", self.gamma0)));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be >= 1"));
        }
        Ok(())
    }

    /// The configured `lambda`, or [`default_lambda`] for `obs`.
    pub fn resolve_lambda(&self, obs: &Tensor3) -> Result<f64> {
        match self.lambda {
            Some(l) => Ok(l),
            None => default_lambda(obs, self.beta0, self.lambda_scale),
        }
    }
}

/// `scale * beta0 * ||obs||_2`, where `||.||_2` is the largest
/// Fourier-domain singular value. With `scale` a little above 1 the first
/// prox threshold `lambda / beta0` sits just above the spectral norm of the
/// zero-filled observation. Falls back to `1 / sqrt(I3 max(I1, I2))` for a
/// zero `obs`.
pub fn default_lambda(obs: &Tensor3, beta0: f64, scale: f64) -> Result<f64> {
    let s = singular_spectrum(obs)?.spectral_norm();
    if s > 0.0 {
        Ok(scale * beta0 * s)
    } else {
        let [n1, n2, n3] = obs.dims();
        Ok(1.0 / ((n3 * n1.max(n2)) as f64).sqrt())
    }
}

/// Shrinkage parameters of the prox step at penalty `beta`.
pub fn shrink_params(p: f64, lambda: f64, beta: f64) -> Result<ShrinkParams> {
    ShrinkParams::with_threshold(p, lambda / beta)
}

/// `||x||_p` with the weight bound at penalty `beta`; the TNN when `p = 1`.
pub fn regularizer(x: &Tensor3, p: f64, lambda: f64, beta: f64) -> Result<f64> {
    let sbar = singular_spectrum(x)?;
    if p == 1.0 {
        Ok(sbar.tnn())
    } else {
        Ok(sbar.ptnn_with(shrink_params(p, lambda, beta)?))
    }
}

/// `F(x)` with the shrinkage weight bound at penalty `beta`.
pub fn objective_at(
    x: &Tensor3,
    obs: &Tensor3,
    mask: &SamplingMask,
    p: f64,
    lambda: f64,
    beta: f64,
) -> Result<f64> {
    x.check_same_dims(obs, "objective")?;
    let (xs, ts) = (x.as_slice(), obs.as_slice());
    let fit: f64 = mask.indices().iter().map(|&i| (xs[i] - ts[i]).powi(2)).sum();
    Ok(0.5 * fit + lambda * regularizer(x, p, lambda, beta)?)
}

/// `F(x)` at the initial penalty `beta0`.
pub fn objective(x: &Tensor3, obs: &Tensor3, mask: &SamplingMask, cfg: &SolverConfig) -> Result<f64> {
    let lambda = cfg.resolve_lambda(&mask.project(obs)?)?;
    objective_at(x, obs, mask, cfg.p, lambda, cfg.beta0)
}

/// `Y = tgsvt(w - z / beta)` at threshold `lambda / beta`.
pub fn update_y(w: &Tensor3, z: &Tensor3, beta: f64, p: f64, lambda: f64) -> Result<Tensor3> {
    w.check_same_dims(z, "update_y")?;
    tgsvt(&w.add_scaled(-1.0 / beta, z), shrink_params(p, lambda, beta)?)
}

/// `X = P_Omega-bar(y + z / beta) + obs`; observed entries are copied from
/// `obs` without arithmetic.
pub fn update_x(y: &Tensor3, z: &Tensor3, beta: f64, obs: &Tensor3, mask: &SamplingMask) -> Result<Tensor3> {
    y.check_same_dims(z, "update_x")?;
    y.check_same_dims(obs, "update_x")?;
    let mut out = y.add_scaled(1.0 / beta, z);
    let (dst, src) = (out.as_mut_slice(), obs.as_slice());
    for &i in mask.indices() {
        dst[i] = src[i];
    }
    Ok(out)
}

/// `Z + beta (y - x)`.
pub fn update_z(z: &Tensor3, y: &Tensor3, x: &Tensor3, beta: f64) -> Result<Tensor3> {
    y.check_same_dims(x, "update_z")?;
    z.check_same_dims(x, "update_z")?;
    let data = z
        .as_slice()
        .iter()
        .zip(y.as_slice().iter().zip(x.as_slice()))
        .map(|(zv, (yv, xv))| zv + beta * (yv - xv))
        .collect();
    Tensor3::from_vec(z.dims(), data)
}

/// The observation, mask and resolved parameters of one completion problem.
#[derive(Clone, Debug)]
pub struct Problem {
    obs: Tensor3,
    mask: SamplingMask,
    p: f64,
    lambda: f64,
}

impl Problem {
    /// Zeroes `obs` outside the mask and resolves `lambda`.
    pub fn new(obs: &Tensor3, mask: &SamplingMask, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if mask.is_empty() {
            return Err(Error::param("sampling mask observes no entries"));
        }
        let obs = mask.project(obs)?;
        let lambda = cfg.resolve_lambda(&obs)?;
        Ok(Self { obs, mask: mask.clone(), p: cfg.p, lambda })
    }

    pub fn obs(&self) -> &Tensor3 {
        &self.obs
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn objective(&self, x: &Tensor3, beta: f64) -> Result<f64> {
        objective_at(x, &self.obs, &self.mask, self.p, self.lambda, beta)
    }
}

/// Iterates of the algorithm. `f_x` caches `F(x)` at the current `beta`.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub x_prev: Tensor3,
    pub x: Tensor3,
    pub y: Tensor3,
    pub z: Tensor3,
    pub w: Tensor3,
    pub q: Tensor3,
    pub beta: f64,
    pub gamma: f64,
    pub iter: usize,
    pub f_x: f64,
}

impl SolverState {
    /// All-zero start with `beta0` and `gamma0`.
    pub fn new(problem: &Problem, cfg: &SolverConfig) -> Result<Self> {
        let zero = Tensor3::zeros(problem.obs.dims());
        let f_x = problem.objective(&zero, cfg.beta0)?;
        Ok(Self {
            x_prev: zero.clone(),
            x: zero.clone(),
            y: zero.clone(),
            z: zero.clone(),
            w: zero.clone(),
            q: zero,
            beta: cfg.beta0,
            gamma: cfg.gamma0,
            iter: 0,
            f_x,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumOutcome {
    pub gamma_next: f64,
    pub accepted: bool,
    /// `F(Q)` at the current `beta`.
    pub f_q: f64,
}

/// Sets `Q = X + gamma (X - X_prev)` and `W` to `Q` if `F(Q) <= F(X)`,
/// otherwise to `X`, adapting `gamma` accordingly.
pub fn momentum_step(state: &mut SolverState, problem: &Problem, cfg: &SolverConfig) -> Result<MomentumOutcome> {
    let diff = &state.x - &state.x_prev;
    state.q = state.x.add_scaled(state.gamma, &diff);
    let f_q = if state.q == state.x { state.f_x } else { problem.objective(&state.q, state.beta)? };
    let accepted = f_q <= state.f_x;
    let gamma_next = if accepted {
        state.w = state.q.clone();
        (cfg.rho * state.gamma).min(1.0)
    } else {
        state.w = state.x.clone();
        state.gamma / cfg.rho
    };
    state.gamma = gamma_next;
    Ok(MomentumOutcome { gamma_next, accepted, f_q })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord {
    /// Zero-based index `t` of the step `X^t -> X^{t+1}`.
    pub iter: usize,
    /// `F(X^{t+1})` at `beta^{t+1}`.
    pub f_value: f64,
    /// `||X^{t+1} - X^t||_F`.
    pub step_norm: f64,
    /// `step_norm / ||X^t||_F`; `None` while `X^t = 0`.
    pub rel_change: Option<f64>,
    /// Momentum weight after this iteration's adaptation.
    pub gamma: f64,
    /// Penalty used by this iteration's updates.
    pub beta: f64,
    pub momentum_accepted: bool,
    /// `F(Q^t)` and `F(X^t)` compared by the momentum test.
    pub f_extrapolated: f64,
    pub f_previous: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    pub status: SolverStatus,
    pub lambda: f64,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}

/// One full iteration; returns its record.
pub fn step(state: &mut SolverState, problem: &Problem, cfg: &SolverConfig) -> Result<IterRecord> {
    let f_previous = state.f_x;
    let m = momentum_step(state, problem, cfg)?;
    let beta = state.beta;
    state.y = update_y(&state.w, &state.z, beta, problem.p, problem.lambda)?;
    let x_next = update_x(&state.y, &state.z, beta, &problem.obs, &problem.mask)?;
    if let Some(i) = x_next.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    state.z = update_z(&state.z, &state.y, &x_next, beta)?;

    let step_norm = x_next.distance(&state.x);
    let x_norm = state.x.fro_norm();
    let rel_change = (x_norm > 0.0).then(|| step_norm / x_norm);

    state.beta = (cfg.eta * beta).min(cfg.beta_max);
    state.x_prev = std::mem::replace(&mut state.x, x_next);
    state.f_x = problem.objective(&state.x, state.beta)?;
    let record = IterRecord {
        iter: state.iter,
        f_value: state.f_x,
        step_norm,
        rel_change,
        gamma: m.gamma_next,
        beta,
        momentum_accepted: m.accepted,
        f_extrapolated: m.f_q,
        f_previous,
    };
    state.iter += 1;
    Ok(record)
}

/// Runs at most `max_iters` iterations, stopping once the relative change
/// drops to `tol`. `observe` sees each record and the new iterate.
pub fn solve_observed(
    obs: &Tensor3,
    mask: &SamplingMask,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&IterRecord, &Tensor3),
) -> Result<(Tensor3, SolverTrace)> {
    let problem = Problem::new(obs, mask, cfg)?;
    let mut state = SolverState::new(&problem, cfg)?;
    let mut records = Vec::new();
    let mut status = SolverStatus::MaxIters;
    while state.iter < cfg.max_iters {
        let rec = step(&mut state, &problem, cfg)?;
        observe(&rec, &state.x);
        records.push(rec);
        if rec.rel_change.is_some_and(|r| r <= cfg.tol) {
            status = SolverStatus::Converged;
            break;
        }
    }
    Ok((state.x, SolverTrace { records, status, lambda: problem.lambda }))
}

/// Completes `obs` from the entries in `mask`.
pub fn solve(obs: &Tensor3, mask: &SamplingMask, cfg: &SolverConfig) -> Result<(Tensor3, SolverTrace)> {
    solve_observed(obs, mask, cfg, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_lowrank, gen_mask, RngSeed};

    fn scalar(v: f64) -> Tensor3 {
        Tensor3::from_vec([1, 1, 1], vec![v]).unwrap()
    }

    fn cfg_with(lambda: f64, beta0: f64, p: f64) -> SolverConfig {
        SolverConfig { p, lambda: Some(lambda), beta0, ..SolverConfig::default() }
    }

    #[test]
    fn objective_cases() {
        let full = SamplingMask::full([1, 1, 1]);
        let zero = scalar(0.0);
        assert_eq!(objective(&zero, &zero, &full, &cfg_with(1.0, 1.0, -1.0)).unwrap(), 0.0);
        let v = objective(&scalar(2.0), &scalar(1.0), &full, &cfg_with(1.0, 1.0, -1.0)).unwrap();
        assert!((v - 2.25).abs() < 1e-15);

        let obs = Tensor3::from_fn([3, 2, 2], |i, j, k| (i + j + k) as f64 + 1.0);
        let mask = SamplingMask::from_predicate([3, 2, 2], |i, _, k| i != k);
        let want = 0.5 * mask.project(&obs).unwrap().fro_norm_sq();
        let got = objective(&Tensor3::zeros([3, 2, 2]), &obs, &mask, &SolverConfig::default()).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn update_y_cases() {
        let z = scalar(0.0);
        assert_eq!(update_y(&scalar(5.0), &z, 1.0, 1.0, 1.0).unwrap().as_slice(), &[4.0]);
        let v = update_y(&scalar(3.0), &z, 1.0, -1.0, 1.0).unwrap().get(0, 0, 0);
        assert!((v - 26.0 / 9.0).abs() < 1e-14);
        let w = Tensor3::from_fn([3, 3, 2], |i, j, k| ((i * 3 + j + k) % 4) as f64 * 0.1);
        let big = update_y(&w, &Tensor3::zeros(w.dims()), 0.01, 1.0, 1.0).unwrap();
        assert_eq!(big.max_abs(), 0.0);
    }

    #[test]
    fn update_x_cases() {
        let dims = [4, 3, 2];
        let y = Tensor3::from_fn(dims, |i, j, k| (i * j + k) as f64 * 0.3);
        let z = Tensor3::from_fn(dims, |i, j, k| i as f64 - j as f64 + k as f64);
        let obs = Tensor3::from_fn(dims, |i, j, _| (i + j) as f64 + 0.125);
        let full = SamplingMask::full(dims);
        assert_eq!(update_x(&y, &z, 2.0, &obs, &full).unwrap(), obs);
        let empty = SamplingMask::from_indices(dims, vec![]).unwrap();
        assert_eq!(update_x(&y, &z, 2.0, &obs, &empty).unwrap(), y.add_scaled(0.5, &z));

        let mask = gen_mask(dims, 0.5, RngSeed(4)).unwrap();
        let x = update_x(&y, &z, 2.0, &obs, &mask).unwrap();
        for i in 0..x.len() {
            let want = if mask.contains(i) { obs.as_slice()[i] } else { y.as_slice()[i] + z.as_slice()[i] / 2.0 };
            assert_eq!(x.as_slice()[i].to_bits(), want.to_bits());
        }
    }

    #[test]
    fn update_z_cases() {
        let x = Tensor3::from_fn([2, 2, 2], |i, j, k| (i + 2 * j + 4 * k) as f64);
        let z = x.scaled(0.5);
        assert_eq!(update_z(&z, &x, &x, 3.0).unwrap(), z);
        let y = x.scaled(-1.0);
        assert_eq!(update_z(&Tensor3::zeros([2, 2, 2]), &y, &x, 1.0).unwrap(), &y - &x);
        assert_eq!(update_z(&scalar(1.0), &scalar(3.0), &scalar(1.0), 2.0).unwrap(), scalar(5.0));
    }

    fn state_for(x_prev: Tensor3, x: Tensor3, gamma: f64) -> (SolverState, Problem, SolverConfig) {
        let cfg = SolverConfig { gamma0: gamma, ..cfg_with(1.0, 1.0, -1.0) };
        let obs = Tensor3::from_fn(x.dims(), |i, j, _| (i + j) as f64);
        let problem = Problem::new(&obs, &SamplingMask::full(x.dims()), &cfg).unwrap();
        let mut state = SolverState::new(&problem, &cfg).unwrap();
        state.f_x = problem.objective(&x, state.beta).unwrap();
        state.x_prev = x_prev;
        state.x = x;
        (state, problem, cfg)
    }

    #[test]
    fn momentum_without_extrapolation_always_accepts() {
        let x = Tensor3::from_fn([2, 2, 2], |i, j, k| (i + j * k) as f64);
        let (mut s, pr, cfg) = state_for(x.clone(), x.clone(), 0.75);
        let m = momentum_step(&mut s, &pr, &cfg).unwrap();
        assert!(m.accepted);
        assert_eq!(m.gamma_next, 1.0);
        assert_eq!(s.w, x);
        let m = momentum_step(&mut s, &pr, &cfg).unwrap();
        assert_eq!(m.gamma_next, 1.0);
    }

    #[test]
    fn momentum_rejection_halves_gamma() {
        // x is the observation itself; extrapolating away from it only adds misfit
        let obs = Tensor3::from_fn([2, 2, 2], |i, j, _| (i + j) as f64);
        let (mut s, pr, cfg) = state_for(obs.scaled(0.0), obs.clone(), 0.4);
        let f_before = s.f_x;
        let m = momentum_step(&mut s, &pr, &cfg).unwrap();
        assert!(!m.accepted);
        assert!(m.f_q > f_before);
        assert_eq!(m.gamma_next, 0.2);
        assert_eq!(s.w, obs);
    }

    #[test]
    fn fully_observed_returns_observation() {
        let t = gen_lowrank([6, 5, 3], 2, RngSeed(5)).unwrap();
        let (x, trace) = solve(&t, &SamplingMask::full(t.dims()), &SolverConfig::default()).unwrap();
        assert_eq!(x, t);
        assert!(trace.iterations() <= 2);
        assert!(trace.converged());
        assert_eq!(trace.records.last().unwrap().step_norm, 0.0);
    }

    #[test]
    fn observed_entries_are_exact_every_iteration() {
        let t = gen_lowrank([12, 10, 4], 2, RngSeed(6)).unwrap();
        let mask = gen_mask(t.dims(), 0.4, RngSeed(6)).unwrap();
        let cfg = SolverConfig { max_iters: 25, ..SolverConfig::default() };
        let mut checked = 0;
        solve_observed(&t, &mask, &cfg, |_, x| {
            for &i in mask.indices() {
                assert_eq!(x.as_slice()[i].to_bits(), t.as_slice()[i].to_bits());
            }
            checked += 1;
        })
        .unwrap();
        assert!(checked > 0);
    }

    #[test]
    fn deterministic() {
        let t = gen_lowrank([10, 10, 4], 2, RngSeed(8)).unwrap();
        let mask = gen_mask(t.dims(), 0.5, RngSeed(8)).unwrap();
        let cfg = SolverConfig { max_iters: 30, ..SolverConfig::default() };
        let (a, ta) = solve(&t, &mask, &cfg).unwrap();
        let (b, tb) = solve(&t, &mask, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.records, tb.records);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = [
            SolverConfig { eta: 1.0, ..SolverConfig::default() },
            SolverConfig { rho: 0.5, ..SolverConfig::default() },
            SolverConfig { gamma0: 1.5, ..SolverConfig::default() },
            SolverConfig { p: 1.2, ..SolverConfig::default() },
            SolverConfig { lambda: Some(0.0), ..SolverConfig::default() },
            SolverConfig { max_iters: 0, ..SolverConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        let t = scalar(1.0);
        let empty = SamplingMask::from_indices([1, 1, 1], vec![]).unwrap();
        assert!(solve(&t, &empty, &SolverConfig::default()).is_err());
    }
}
