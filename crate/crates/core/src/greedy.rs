//! Lazy greedy selection of left nodes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::instance::CoverageInstance;
use crate::objective::FractionalPoint;
use crate::reward::Reward;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    /// Selected left nodes in selection order.
    pub set: Vec<usize>,
    /// Marginal gain of each selection.
    pub gains: Vec<f64>,
    /// `C(S)` after each selection.
    pub values: Vec<f64>,
    /// True when the budget exceeded `n` and every node was taken.
    pub exhausted: bool,
}

impl GreedyResult {
    pub fn value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Greedy maximization of `C(S)` subject to `|S| <= k`, breaking ties by
/// smallest index. Uses stale upper bounds (valid by submodularity) so most
/// marginals are never recomputed.
pub fn greedy_select(inst: &CoverageInstance, reward: &Reward, k: usize) -> GreedyResult {
    let n = inst.n();
    let budget = k.min(n);
    let slopes: Vec<f64> = (1..=inst.max_degree() as u64 + 1)
        .map(|i| reward.slope(i))
        .collect();
    let weights = inst.weights();
    let mut counts = vec![0usize; inst.r()];
    let gain_of = |i: usize, counts: &[usize]| -> f64 {
        inst.right_nodes_of(i)
            .iter()
            .map(|&j| weights[j] * slopes[counts[j]])
            .sum()
    };

    let mut heap: BinaryHeap<(OrderedFloat<f64>, Reverse<usize>, usize)> = (0..n)
        .map(|i| (OrderedFloat(gain_of(i, &counts)), Reverse(i), 0))
        .collect();

    let mut set = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);
    let mut values = Vec::with_capacity(budget);
    let mut total = 0.0;
    while set.len() < budget {
        let round = set.len();
        let (bound, Reverse(i), stamp) = heap.pop().expect("heap holds every unselected node");
        if stamp == round {
            for &j in inst.right_nodes_of(i) {
                counts[j] += 1;
            }
            total += bound.0;
            set.push(i);
            gains.push(bound.0);
            values.push(total);
        } else {
            heap.push((OrderedFloat(gain_of(i, &counts)), Reverse(i), round));
        }
    }
    GreedyResult {
        set,
        gains,
        values,
        exhausted: k > n,
    }
}

/// Indicator of `set`, padded with the lowest-index unselected nodes until
/// it sums to `k`.
pub fn greedy_indicator(set: &[usize], n: usize, k: usize) -> Result<FractionalPoint> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "budget {k} exceeds n = {n}"
        )));
    }
    if set.len() > k {
        return Err(Error::InvalidArgument(format!(
            "set has {} elements, more than k = {k}",
            set.len()
        )));
    }
    let mut x = vec![0.0; n];
    for &i in set {
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range (n = {n})"
            )));
        }
        x[i] = 1.0;
    }
    let mut filled = x.iter().filter(|&&v| v == 1.0).count();
    for v in x.iter_mut() {
        if filled >= k {
            break;
        }
        if *v == 0.0 {
            *v = 1.0;
            filled += 1;
        }
    }
    FractionalPoint::new(x, k)
}
