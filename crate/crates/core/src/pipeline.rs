//! Greedy, fractional solve and rounding chained together.

use std::time::Instant;

use rand::Rng;

use crate::error::Result;
use crate::instance::CoverageInstance;
use crate::objective::FractionalPoint;
use crate::reward::Reward;
use crate::rounding::{round_best_of, RoundResult};
use crate::solver::{accelerated_solve, SolveOptions, SolveReport};

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub fractional: FractionalPoint,
    pub solve: SolveReport,
    pub round: RoundResult,
    pub round_seconds: f64,
}

/// Solves the relaxation and keeps the best of `trials` swap roundings.
pub fn relax_and_round<R: Rng + ?Sized>(
    inst: &CoverageInstance,
    reward: &Reward,
    k: usize,
    eps: f64,
    opts: &SolveOptions,
    trials: usize,
    rng: &mut R,
) -> Result<PipelineResult> {
    let (fractional, solve) = accelerated_solve(inst, reward, k, eps, opts)?;
    let clock = Instant::now();
    let round = round_best_of(inst, reward, &fractional, trials, rng)?;
    Ok(PipelineResult {
        fractional,
        solve,
        round,
        round_seconds: clock.elapsed().as_secs_f64(),
    })
}
