#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use relaxround::solver::hypersimplex_project;
use relaxround::{CoverageInstance, FractionalPoint, Reward};

/// Random instance with `n` left nodes, `r` right nodes, neighborhoods of
/// size `1..=max_deg` and weights in `[0.1, 1)`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    r: usize,
    max_deg: usize,
) -> CoverageInstance {
    let nbrs: Vec<Vec<usize>> = (0..r)
        .map(|_| {
            let d = rng.random_range(1..=max_deg.min(n));
            let mut s = sample(rng, n, d).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    let weights = (0..r).map(|_| rng.random_range(0.1..1.0)).collect();
    CoverageInstance::from_neighborhoods(n, &nbrs, weights).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize, k: usize) -> FractionalPoint {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
    hypersimplex_project(&raw, k).unwrap()
}

pub fn random_reward<R: Rng>(rng: &mut R) -> Reward {
    match rng.random_range(0..4) {
        0 => Reward::MultiCoverage {
            c: rng.random_range(1..5),
        },
        1 => Reward::Log,
        2 => Reward::Isoelastic {
            gamma: rng.random_range(0.05..0.95),
        },
        _ => Reward::PiecewiseLinearDiscount {
            c: rng.random_range(1..4),
            beta: rng.random_range(0.0..1.0),
        },
    }
}

/// Prints one verdict line and returns whether the criterion held.
pub fn verdict(id: u32, name: &str, ok: bool, detail: impl AsRef<str>) -> bool {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{tag}] {name}: {}", detail.as_ref());
    ok
}
