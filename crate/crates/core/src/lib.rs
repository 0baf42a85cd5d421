//! Accelerated relax-and-round for cardinality-constrained concave coverage.
//!
//! Given a weighted bipartite graph `(L, R, E)`, a concave nondecreasing
//! reward `phi` and a budget `k`, the solver maximizes
//! `C(S) = sum_j w_j * phi(|S ∩ N(j)|)` over `k`-subsets `S` of `L`:
//!
//! 1. lazy greedy produces a starting vertex ([`greedy`]);
//! 2. accelerated projected gradient ascent optimizes a log-sum-exp smoothed
//!    relaxation over the hypersimplex ([`objective`], [`solver`]);
//! 3. the fractional point is decomposed into hypersimplex vertices and
//!    merged by randomized swaps into a `k`-subset ([`rounding`]).
//!
//! [`ratios`] computes Poisson concavity ratios (the approximation ratio of
//! the whole pipeline) and [`hardgen`] builds instances on which greedy is
//! stuck near `1 - 1/e`.

pub mod error;
pub mod greedy;
pub mod hardgen;
pub mod instance;
pub mod objective;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod pipeline;
pub mod ratios;
pub mod reward;
pub mod rounding;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{CoverageInstance, UndirectedGraph};
pub use objective::FractionalPoint;
pub use reward::Reward;
