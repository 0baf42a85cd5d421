//! Multi-coverage instances on which greedy stays close to `1 - 1/e`.
//!
//! With `ℓ = c - 1` and `q = c + 1`, the right side is `q` blocks of `ℓ`
//! rows. The optimum uses `k = qc` columns, `c` per block, each covering all
//! `ℓ` rows of its block, for a total of `ℓqc`. Bait sets are cyclic arcs
//! over one row per block: phase `i` uses the `i`-th row of every block and
//! arcs of length `ℓ + 2 - i` (some one longer) that cover each of its `q`
//! nodes exactly `c` times. Every bait arc beats every optimum column on
//! marginal value, so greedy burns its budget on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::greedy_select;
use crate::instance::CoverageInstance;
use crate::reward::Reward;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase {
    /// Row of each block used as arc nodes.
    pub row: usize,
    pub base_length: usize,
    pub arcs: usize,
    /// The first `extended` arcs have length `base_length + 1`.
    pub extended: usize,
    /// Index of this phase's first left node.
    pub first_left: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardInstance {
    pub instance: CoverageInstance,
    pub c: u64,
    pub l: usize,
    pub q: usize,
    pub k: usize,
    pub opt_value: f64,
    pub phases: Vec<Phase>,
}

impl HardInstance {
    pub fn reward(&self) -> Reward {
        Reward::MultiCoverage { c: self.c }
    }

    /// Left nodes of the optimum: the first `k` indices.
    pub fn optimum_columns(&self) -> Vec<usize> {
        (0..self.k).collect()
    }

    pub fn num_bait(&self) -> usize {
        self.phases.iter().map(|p| p.arcs).sum()
    }
}

pub fn generate_hard_instance(c: u64) -> Result<HardInstance> {
    if c < 2 {
        return Err(Error::InvalidArgument(format!(
            "hard instances need c >= 2, got {c}"
        )));
    }
    let cu = usize::try_from(c).map_err(|_| Error::TooLarge(format!("c = {c}")))?;
    let l = cu - 1;
    let q = cu + 1;
    let k = q * cu;
    let r = l * q;
    let row_node = |block: usize, row: usize| block * l + row;

    let mut neighborhoods: Vec<Vec<usize>> = Vec::with_capacity(k + 2 * k);
    for block in 0..q {
        for _ in 0..cu {
            neighborhoods.push((0..l).map(|row| row_node(block, row)).collect());
        }
    }

    let mut phases = Vec::new();
    let mut bait = 0usize;
    for row in 0..l {
        if bait >= k {
            break;
        }
        let base = l + 1 - row;
        if base + 1 > q {
            return Err(Error::Construction(format!(
                "phase {} arcs of length {} exceed the cycle length {q}",
                row + 1,
                base + 1
            )));
        }
        let arcs = k / base;
        let extended = k % base;
        if extended > arcs {
            return Err(Error::Construction(format!(
                "phase {} needs {extended} extended arcs but has only {arcs}",
                row + 1
            )));
        }
        phases.push(Phase {
            row,
            base_length: base,
            arcs,
            extended,
            first_left: neighborhoods.len(),
        });
        let mut pos = 0usize;
        for a in 0..arcs {
            let len = if a < extended { base + 1 } else { base };
            let mut nodes: Vec<usize> = (0..len).map(|t| row_node((pos + t) % q, row)).collect();
            nodes.sort_unstable();
            neighborhoods.push(nodes);
            pos += len;
        }
        debug_assert_eq!(pos, k);
        bait += arcs;
    }

    // neighborhoods above are left-side sets; flip them into right adjacency
    let n = neighborhoods.len();
    let edges: Vec<(usize, usize)> = neighborhoods
        .iter()
        .enumerate()
        .flat_map(|(i, nodes)| nodes.iter().map(move |&j| (i, j)))
        .collect();
    let instance = CoverageInstance::from_edges(n, r, &edges, vec![1.0; r])?;
    Ok(HardInstance {
        instance,
        c,
        l,
        q,
        k,
        opt_value: (l * q * cu) as f64,
        phases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub greedy_value: f64,
    pub opt_value: f64,
    pub ratio: f64,
    /// `1 - 1/e + 3.3/ℓ`.
    pub bound: f64,
}

/// Runs greedy with the instance's budget and compares it with the known
/// optimum. Fails if the ratio exceeds the guaranteed bound.
pub fn greedy_gap_report(hard: &HardInstance) -> Result<GapReport> {
    let greedy = greedy_select(&hard.instance, &hard.reward(), hard.k);
    let greedy_value = greedy.value();
    let ratio = greedy_value / hard.opt_value;
    let bound = 1.0 - (-1.0f64).exp() + 3.3 / hard.l as f64;
    if ratio > bound + 1e-12 {
        return Err(Error::Construction(format!(
            "greedy ratio {ratio} exceeds the bound {bound}"
        )));
    }
    Ok(GapReport {
        greedy_value,
        opt_value: hard.opt_value,
        ratio,
        bound,
    })
}
