//! Accelerated projected gradient ascent on the smoothed relaxation.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::{greedy_indicator, greedy_select};
use crate::instance::CoverageInstance;
use crate::objective::{FractionalPoint, SmoothingContext};
use crate::reward::Reward;

pub const DEFAULT_TOL: f64 = 1e-6;
/// Number of iterations the early-stopping rule looks back over.
pub const EARLY_STOP_WINDOW: usize = 10;

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum EtaMode {
    /// `η = 4μ / d_R`.
    Theoretical,
    /// A fixed step size.
    Absolute(f64),
    /// A multiple of `4μ / d_R`.
    Scale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub mu: f64,
    pub eta: f64,
    #[serde(rename = "T")]
    pub iterations: usize,
    pub tol: f64,
    pub eta_mode: EtaMode,
}

/// Smoothing parameter, step size and iteration budget for a run with
/// accuracy `eps`, greedy value `c_greedy` (normalized weights), effective
/// degree `d_r` and budget `k`.
pub fn make_schedule(eps: f64, c_greedy: f64, d_r: f64, k: usize) -> Result<Schedule> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("budget k must be at least 1".into()));
    }
    if !(d_r > 1.0 + 1e-9) {
        return Err(Error::DegenerateSmoothing(format!(
            "effective degree {d_r} gives log d_R = 0"
        )));
    }
    if !(c_greedy > 0.0) {
        return Err(Error::DegenerateSmoothing("greedy value is zero".into()));
    }
    let log_d = d_r.ln();
    let mu = eps * c_greedy / (2.0 * log_d);
    let eta = 4.0 * mu / d_r;
    let inv_e = (-1.0f64).exp();
    let t = (2.0 / (eps * c_greedy))
        * (k as f64 * d_r * log_d / ((1.0 - inv_e) * (1.0 + inv_e))).sqrt();
    Ok(Schedule {
        mu,
        eta,
        iterations: t.ceil().max(1.0) as usize,
        tol: DEFAULT_TOL,
        eta_mode: EtaMode::Theoretical,
    })
}

impl Schedule {
    /// Applies a step-size override.
    pub fn with_eta_mode(mut self, mode: EtaMode, d_r: f64) -> Self {
        let base = 4.0 * self.mu / d_r;
        self.eta = match mode {
            EtaMode::Theoretical => base,
            EtaMode::Absolute(eta) => eta,
            EtaMode::Scale(s) => s * base,
        };
        self.eta_mode = mode;
        self
    }
}

/// `Σ_i min(max(x_i - λ, 0), 1)`.
pub fn clamped_shifted_sum(x: &[f64], lambda: f64) -> f64 {
    x.iter().map(|&v| (v - lambda).clamp(0.0, 1.0)).sum()
}

/// Euclidean projection onto `{y ∈ [0,1]^n : Σ y = k}`.
pub fn hypersimplex_project(x: &[f64], k: usize) -> Result<FractionalPoint> {
    let mut out = vec![0.0; x.len()];
    let mut scratch = Vec::with_capacity(2 * x.len());
    project_into(x, k, &mut out, &mut scratch)?;
    FractionalPoint::new(out, k)
}

/// Allocation-free form of [`hypersimplex_project`]; returns the shift `λ*`.
pub fn project_into(x: &[f64], k: usize, out: &mut [f64], points: &mut Vec<f64>) -> Result<f64> {
    let n = x.len();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "budget {k} exceeds n = {n}"
        )));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "coordinate {i} is not finite"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    points.clear();
    for &v in x {
        points.push(v - 1.0);
        points.push(v);
    }
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();
    let target = k as f64;

    // F is nonincreasing; find the last breakpoint with F >= k
    let (mut lo, mut hi) = (0usize, points.len() - 1);
    if clamped_shifted_sum(x, points[hi]) >= target {
        lo = hi;
    } else {
        // invariant: F(points[lo]) >= k > F(points[hi])
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if clamped_shifted_sum(x, points[mid]) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let l1 = points[lo];
    let f1 = clamped_shifted_sum(x, l1);
    let lambda = if lo == hi || f1 == target {
        l1
    } else {
        let l2 = points[hi];
        let f2 = clamped_shifted_sum(x, l2);
        if f1 == f2 {
            l1
        } else {
            l1 + (l2 - l1) * (f1 - target) / (f1 - f2)
        }
    };
    for (o, &v) in out.iter_mut().zip(x) {
        *o = (v - lambda).clamp(0.0, 1.0);
    }
    Ok(lambda)
}

/// Tunables of [`accelerated_solve`] beyond `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub eta: EtaMode,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub early_stop: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            eta: EtaMode::Theoretical,
            tol: DEFAULT_TOL,
            max_iter: None,
            early_stop: true,
        }
    }
}

/// Outcome of one fractional solve. Objective values are in the units of
/// the instance's weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub epsilon: f64,
    pub k: usize,
    /// `None` when the iteration was skipped (see `degenerate`).
    pub schedule: Option<Schedule>,
    /// Gradient iterations actually performed.
    pub iterations: usize,
    pub stopped_early: bool,
    /// Set when smoothing is undefined (`d_R = 1`, zero greedy value) or
    /// the budget admits a single point; the greedy vertex is returned.
    pub degenerate: bool,
    pub greedy_set: Vec<usize>,
    pub greedy_value: f64,
    /// `C(x)` of the returned point.
    pub value: f64,
    /// Iteration that produced the returned point (0 = greedy vertex).
    pub best_iteration: usize,
    /// `C̃_μ` at the last iterate.
    pub final_smooth_value: f64,
    /// `C̃_μ(x^t)` for `t = 0..=iterations`.
    pub smooth_trace: Vec<f64>,
    /// `C(x^t)` for `t = 0..=iterations`.
    pub true_trace: Vec<f64>,
    pub greedy_seconds: f64,
    pub solve_seconds: f64,
}

/// Greedy initialization followed by accelerated projected gradient ascent
/// on `C̃_μ` over the hypersimplex. Returns the iterate with the largest
/// `C(x)` seen, which is never worse than the greedy vertex.
pub fn accelerated_solve(
    inst: &CoverageInstance,
    reward: &Reward,
    k: usize,
    eps: f64,
    opts: &SolveOptions,
) -> Result<(FractionalPoint, SolveReport)> {
    if !reward.is_normalized() {
        return Err(Error::InvalidReward(
            "reward must satisfy phi(0) = 0 and phi(1) = 1; normalize it first".into(),
        ));
    }
    if k > inst.n() {
        return Err(Error::InvalidArgument(format!(
            "budget {k} exceeds n = {}",
            inst.n()
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be nonnegative, got {}",
            opts.tol
        )));
    }
    let scale = inst.total_weight();
    let norm = inst.normalize_weights()?;
    let n = norm.n();

    let clock = Instant::now();
    let greedy = greedy_select(&norm, reward, k);
    let x0 = greedy_indicator(&greedy.set, n, k)?;
    let greedy_seconds = clock.elapsed().as_secs_f64();
    let c_greedy = greedy.value();

    let mut report = SolveReport {
        epsilon: eps,
        k,
        schedule: None,
        iterations: 0,
        stopped_early: false,
        degenerate: false,
        greedy_set: greedy.set.clone(),
        greedy_value: c_greedy * scale,
        value: c_greedy * scale,
        best_iteration: 0,
        final_smooth_value: c_greedy * scale,
        smooth_trace: Vec::new(),
        true_trace: Vec::new(),
        greedy_seconds,
        solve_seconds: 0.0,
    };

    let clock = Instant::now();
    let d_r = crate::objective::effective_degree(&norm);
    let schedule = match make_schedule(eps, c_greedy, d_r, k.max(1)) {
        Ok(s) if k > 0 && k < n => s.with_eta_mode(opts.eta, d_r),
        Ok(_) | Err(Error::DegenerateSmoothing(_)) => {
            report.degenerate = true;
            report.true_trace.push(c_greedy * scale);
            report.smooth_trace.push(c_greedy * scale);
            report.solve_seconds = clock.elapsed().as_secs_f64();
            return Ok((x0, report));
        }
        Err(e) => return Err(e),
    };
    if !(schedule.eta > 0.0 && schedule.eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {}",
            schedule.eta
        )));
    }
    let schedule = Schedule {
        tol: opts.tol,
        ..schedule
    };
    let budget = opts
        .max_iter
        .map_or(schedule.iterations, |m| m.min(schedule.iterations));

    let ctx = SmoothingContext::new(&norm, reward, schedule.mu)?;
    let mut x = x0.into_vec();
    let mut y = x.clone();
    let mut x_next = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut points = Vec::with_capacity(2 * n);
    let mut beta = 1.0f64;

    let (s0, c0) = ctx.value_and_true(&norm, &x);
    // same evaluator as the iterates, so value >= greedy_value holds exactly
    report.greedy_value = c0 * scale;
    let mut smooth_trace = vec![s0];
    let mut true_trace = vec![c0];
    let mut best_x = x.clone();
    let mut best_value = c0;
    let mut best_iteration = 0;
    let mut iterations = 0;
    let mut stopped_early = false;

    for t in 0..budget {
        ctx.gradient(&norm, &y, &mut grad);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        for (yi, gi) in y.iter_mut().zip(&grad) {
            *yi += schedule.eta * gi;
        }
        project_into(&y, k, &mut x_next, &mut points)?;
        let beta_next = 0.5 * (1.0 + (1.0 + 4.0 * beta * beta).sqrt());
        let momentum = (beta - 1.0) / beta_next;
        for i in 0..n {
            y[i] = x_next[i] + momentum * (x_next[i] - x[i]);
        }
        std::mem::swap(&mut x, &mut x_next);
        beta = beta_next;
        iterations = t + 1;

        let (s, c) = ctx.value_and_true(&norm, &x);
        smooth_trace.push(s);
        true_trace.push(c);
        if c > best_value {
            best_value = c;
            best_x.copy_from_slice(&x);
            best_iteration = iterations;
        }
        if opts.early_stop && iterations >= EARLY_STOP_WINDOW {
            let past = smooth_trace[iterations - EARLY_STOP_WINDOW];
            let rel =
                (s - past).abs() / (EARLY_STOP_WINDOW as f64 * past.abs().max(f64::MIN_POSITIVE));
            if rel < schedule.tol {
                stopped_early = true;
                break;
            }
        }
    }

    report.final_smooth_value = smooth_trace.last().copied().unwrap_or(s0) * scale;
    report.smooth_trace = smooth_trace.into_iter().map(|v| v * scale).collect();
    report.true_trace = true_trace.into_iter().map(|v| v * scale).collect();
    report.value = best_value * scale;
    report.best_iteration = best_iteration;
    report.iterations = iterations;
    report.stopped_early = stopped_early;
    report.schedule = Some(schedule);
    report.solve_seconds = clock.elapsed().as_secs_f64();
    Ok((FractionalPoint::new(best_x, k)?, report))
}
