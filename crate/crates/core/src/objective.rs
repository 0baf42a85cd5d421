//! Objective evaluation: discrete coverage `C(S)`, its concave relaxation
//! `C(x)`, the log-sum-exp smoothing `C̃_μ(x)` with gradient, and the
//! multilinear extension `F(x)`.

use crate::error::{Error, Result};
use crate::instance::CoverageInstance;
use crate::reward::Reward;

/// Slack allowed when checking box and budget membership.
pub const BOX_TOL: f64 = 1e-9;
pub const SUM_TOL: f64 = 1e-8;

/// A point of the hypersimplex `{x ∈ [0,1]^n : Σ x = k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint {
    x: Vec<f64>,
    k: usize,
}

impl FractionalPoint {
    pub fn new(x: Vec<f64>, k: usize) -> Result<Self> {
        check_box(&x)?;
        let sum: f64 = x.iter().sum();
        if (sum - k as f64).abs() > SUM_TOL * (1.0 + k as f64) {
            return Err(Error::InvalidArgument(format!(
                "coordinates sum to {sum}, expected {k}"
            )));
        }
        Ok(Self { x, k })
    }

    /// Indicator vector of `set`.
    pub fn indicator(set: &[usize], n: usize) -> Result<Self> {
        let mut x = vec![0.0; n];
        for &i in set {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range (n = {n})"
                )));
            }
            x[i] = 1.0;
        }
        let k = x.iter().filter(|&&v| v == 1.0).count();
        Ok(Self { x, k })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }
}

fn check_box(x: &[f64]) -> Result<()> {
    for (i, &v) in x.iter().enumerate() {
        if !(v >= -BOX_TOL && v <= 1.0 + BOX_TOL) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} = {v} lies outside [0, 1]"
            )));
        }
    }
    Ok(())
}

fn check_len(inst: &CoverageInstance, x: &[f64]) -> Result<()> {
    if x.len() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, instance has n = {}",
            x.len(),
            inst.n()
        )));
    }
    Ok(())
}

/// `Σ_j w_j φ(|S ∩ N(j)|)`. Repeated indices count once.
pub fn coverage_discrete(inst: &CoverageInstance, reward: &Reward, set: &[usize]) -> Result<f64> {
    let mut mask = vec![false; inst.n()];
    for &i in set {
        if i >= inst.n() {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range (n = {})",
                inst.n()
            )));
        }
        mask[i] = true;
    }
    let mut total = 0.0;
    for (j, &w) in inst.weights().iter().enumerate() {
        let hits = inst.neighbors(j).iter().filter(|&&i| mask[i]).count();
        total += w * reward.phi(hits as u64);
    }
    Ok(total)
}

/// `Σ_j w_j φ̄(y_j)` with `y_j = Σ_{i ∈ N(j)} x_i` and `φ̄` the piecewise-linear
/// extension of `φ`.
pub fn coverage_fractional(inst: &CoverageInstance, reward: &Reward, x: &[f64]) -> Result<f64> {
    check_len(inst, x)?;
    check_box(x)?;
    let mut total = 0.0;
    for (j, &w) in inst.weights().iter().enumerate() {
        total += w * reward.extended_phi(load(inst, j, x).max(0.0));
    }
    Ok(total)
}

/// Weighted average degree of the right side, `Σ_j w_j deg(j) / Σ_j w_j`.
/// For normalized weights this is `Σ_j w_j deg(j)`.
pub fn effective_degree(inst: &CoverageInstance) -> f64 {
    let total = inst.total_weight();
    let acc: f64 = (0..inst.r())
        .map(|j| inst.weights()[j] * inst.degree(j) as f64)
        .sum();
    acc / total
}

pub fn smooth_value(inst: &CoverageInstance, reward: &Reward, x: &[f64], mu: f64) -> Result<f64> {
    check_len(inst, x)?;
    Ok(SmoothingContext::new(inst, reward, mu)?.value(inst, x))
}

pub fn smooth_gradient(
    inst: &CoverageInstance,
    reward: &Reward,
    x: &[f64],
    mu: f64,
) -> Result<Vec<f64>> {
    check_len(inst, x)?;
    let ctx = SmoothingContext::new(inst, reward, mu)?;
    let mut grad = vec![0.0; inst.n()];
    ctx.gradient(inst, x, &mut grad);
    Ok(grad)
}

/// `E[C(S_x)]` where each `i` joins `S_x` independently with probability
/// `x_i`. Costs `O(Σ_j deg(j)^2)`.
pub fn multilinear_extension(inst: &CoverageInstance, reward: &Reward, x: &[f64]) -> Result<f64> {
    check_len(inst, x)?;
    check_box(x)?;
    let mut dist = Vec::new();
    let mut total = 0.0;
    for (j, &w) in inst.weights().iter().enumerate() {
        let nbrs = inst.neighbors(j);
        dist.clear();
        dist.resize(nbrs.len() + 1, 0.0);
        dist[0] = 1.0;
        for (seen, &i) in nbrs.iter().enumerate() {
            let p = x[i].clamp(0.0, 1.0);
            for c in (0..=seen + 1).rev() {
                let stay = dist[c] * (1.0 - p);
                let arrive = if c > 0 { dist[c - 1] * p } else { 0.0 };
                dist[c] = stay + arrive;
            }
        }
        let expect: f64 = dist
            .iter()
            .enumerate()
            .map(|(c, &pr)| pr * reward.phi(c as u64))
            .sum();
        total += w * expect;
    }
    Ok(total)
}

fn load(inst: &CoverageInstance, j: usize, x: &[f64]) -> f64 {
    inst.neighbors(j).iter().map(|&i| x[i]).sum()
}

/// One linear piece `y ↦ slope·y + intercept` of the concave envelope,
/// first active at integer `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    start: usize,
    slope: f64,
    intercept: f64,
}

/// Precomputed data for evaluating `C̃_μ`, `∇C̃_μ` and `C` on one instance.
///
/// Right node `j` contributes `-μ log Σ_i exp(-(s(i) y_j + b_i)/μ)` over its
/// pieces `i = 1..deg(j)`. Consecutive pieces with equal slope describe the
/// same line and are merged, so saturating rewards only pay for their
/// distinct pieces.
#[derive(Debug, Clone)]
pub struct SmoothingContext {
    mu: f64,
    pieces: Vec<Piece>,
    /// `pieces_for_degree[d]` = number of merged pieces active for degree `d`.
    pieces_for_degree: Vec<usize>,
    phi_table: Vec<f64>,
    effective_degree: f64,
}

impl SmoothingContext {
    pub fn new(inst: &CoverageInstance, reward: &Reward, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smoothing mu must be positive, got {mu}"
            )));
        }
        let max_deg = inst.max_degree();
        let phi_table: Vec<f64> = (0..=max_deg as u64 + 1).map(|i| reward.phi(i)).collect();
        let mut pieces: Vec<Piece> = Vec::new();
        let mut pieces_for_degree = vec![0usize; max_deg + 1];
        for i in 1..=max_deg {
            let slope = phi_table[i] - phi_table[i - 1];
            if pieces.last().map_or(true, |p| p.slope != slope) {
                pieces.push(Piece {
                    start: i,
                    slope,
                    intercept: phi_table[i - 1] - slope * (i - 1) as f64,
                });
            }
            pieces_for_degree[i] = pieces.len();
        }
        Ok(Self {
            mu,
            pieces,
            pieces_for_degree,
            phi_table,
            effective_degree: effective_degree(inst),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn effective_degree(&self) -> f64 {
        self.effective_degree
    }

    /// Number of distinct linear pieces across all degrees.
    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Intercepts `b_i` of the merged pieces, first active at the returned
    /// integer.
    pub fn intercepts(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pieces.iter().map(|p| (p.start, p.intercept))
    }

    /// Softmin of the pieces at load `y`; writes normalized probabilities
    /// into `probs` when given.
    fn soft_min(&self, pieces: &[Piece], y: f64, probs: Option<&mut Vec<f64>>) -> f64 {
        if let [only] = pieces {
            if let Some(p) = probs {
                p.clear();
                p.push(1.0);
            }
            return only.slope * y + only.intercept;
        }
        let inv_mu = 1.0 / self.mu;
        let mut shift = f64::NEG_INFINITY;
        for p in pieces {
            shift = shift.max(-(p.slope * y + p.intercept) * inv_mu);
        }
        match probs {
            Some(out) => {
                out.clear();
                let mut z = 0.0;
                for p in pieces {
                    let e = (-(p.slope * y + p.intercept) * inv_mu - shift).exp();
                    out.push(e);
                    z += e;
                }
                for e in out.iter_mut() {
                    *e /= z;
                }
                -self.mu * (shift + z.ln())
            }
            None => {
                let z: f64 = pieces
                    .iter()
                    .map(|p| (-(p.slope * y + p.intercept) * inv_mu - shift).exp())
                    .sum();
                -self.mu * (shift + z.ln())
            }
        }
    }

    fn pieces_of(&self, inst: &CoverageInstance, j: usize) -> &[Piece] {
        &self.pieces[..self.pieces_for_degree[inst.degree(j)]]
    }

    /// `C̃_μ(x)`; `x` need not lie in the box.
    pub fn value(&self, inst: &CoverageInstance, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (j, &w) in inst.weights().iter().enumerate() {
            total += w * self.soft_min(self.pieces_of(inst, j), load(inst, j, x), None);
        }
        total
    }

    /// `(C̃_μ(x), C(x))` in one pass. `C` uses the piecewise-linear extension
    /// and is meaningful for `x` in the box.
    pub fn value_and_true(&self, inst: &CoverageInstance, x: &[f64]) -> (f64, f64) {
        let mut smooth = 0.0;
        let mut exact = 0.0;
        for (j, &w) in inst.weights().iter().enumerate() {
            let y = load(inst, j, x);
            smooth += w * self.soft_min(self.pieces_of(inst, j), y, None);
            exact += w * self.extended(y);
        }
        (smooth, exact)
    }

    /// `C(x)` using cached `φ` values.
    pub fn true_value(&self, inst: &CoverageInstance, x: &[f64]) -> f64 {
        inst.weights()
            .iter()
            .enumerate()
            .map(|(j, &w)| w * self.extended(load(inst, j, x)))
            .sum()
    }

    fn extended(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, (self.phi_table.len() - 1) as f64);
        let fl = y.floor();
        let base = fl as usize;
        let frac = y - fl;
        if frac == 0.0 || base + 1 >= self.phi_table.len() {
            return self.phi_table[base];
        }
        (1.0 - frac) * self.phi_table[base] + frac * self.phi_table[base + 1]
    }

    /// Writes `∇C̃_μ(x)` into `grad` (overwriting it). Right nodes are
    /// accumulated in ascending order, so results are bitwise reproducible.
    pub fn gradient(&self, inst: &CoverageInstance, x: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        let mut probs = Vec::with_capacity(self.pieces.len());
        for (j, &w) in inst.weights().iter().enumerate() {
            let pieces = self.pieces_of(inst, j);
            self.soft_min(pieces, load(inst, j, x), Some(&mut probs));
            let mean_slope: f64 = pieces.iter().zip(&probs).map(|(p, q)| p.slope * q).sum();
            let g = w * mean_slope;
            for &i in inst.neighbors(j) {
                grad[i] += g;
            }
        }
    }
}
