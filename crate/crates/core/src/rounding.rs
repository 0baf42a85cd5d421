//! Rounding a hypersimplex point to a `k`-subset: vertex decomposition
//! followed by randomized swap merging.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use ordered_float::OrderedFloat;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::CoverageInstance;
use crate::objective::{coverage_discrete, FractionalPoint};
use crate::reward::Reward;
use crate::solver::project_into;

/// Residual coordinates (and peeling steps) below this are treated as zero.
const SNAP: f64 = 1e-14;
/// Remaining mass below this is roundoff and goes to the current vertex.
const MASS_FLOOR: f64 = 1e-12;

/// Convex combination `Σ_t α_t 1_{v_t}` of hypersimplex vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_t α_t 1_{v_t}` as a dense vector.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (a, v) in &self.terms {
            for &i in v {
                x[i] += a;
            }
        }
        x
    }
}

type Key = (Reverse<OrderedFloat<f64>>, usize);

/// Peels vertices off `x`: at each step take the `k` largest residual
/// coordinates (lower index on ties) and remove as much mass along that
/// vertex as keeps the residual inside the scaled hypersimplex. Produces at
/// most `n` terms in `O(nk log n)` time.
pub fn caratheodory_decompose(x: &FractionalPoint) -> Result<Decomposition> {
    let n = x.x().len();
    let k = x.k();
    if k == 0 {
        return Ok(Decomposition {
            terms: vec![(1.0, Vec::new())],
        });
    }
    if k == n {
        return Ok(Decomposition {
            terms: vec![(1.0, (0..n).collect())],
        });
    }
    // remove the up-to-1e-8 slack FractionalPoint tolerates
    let mut r = vec![0.0; n];
    project_into(x.x(), k, &mut r, &mut Vec::new())?;

    let mut order: BTreeSet<Key> = (0..n).map(|i| (Reverse(OrderedFloat(r[i])), i)).collect();
    let mut w = 1.0f64;
    let mut terms: Vec<(f64, Vec<usize>)> = Vec::new();
    let set_value = |order: &mut BTreeSet<Key>, r: &mut [f64], i: usize, v: f64| {
        order.remove(&(Reverse(OrderedFloat(r[i])), i));
        r[i] = v;
        order.insert((Reverse(OrderedFloat(v)), i));
    };

    let max_steps = 3 * n + 3;
    for _ in 0..max_steps {
        let mut it = order.iter();
        let top: Vec<usize> = it.by_ref().take(k).map(|&(_, i)| i).collect();
        let (min_in_idx, min_in) = {
            let i = *top.last().unwrap();
            (i, r[i])
        };
        let outside = it.next().map(|&(Reverse(v), i)| (i, v.0));
        let max_out = outside.map_or(0.0, |(_, v)| v);

        if min_in <= SNAP && min_in < w {
            set_value(&mut order, &mut r, min_in_idx, 0.0);
            if min_in > 0.0 {
                continue;
            }
        }
        if let Some((j, v)) = outside {
            if v > 0.0 && v < w && w - v <= SNAP {
                set_value(&mut order, &mut r, j, w);
                continue;
            }
        }

        let alpha = min_in.min(w - max_out).max(0.0);
        if alpha >= w || w - alpha <= MASS_FLOOR {
            // last vertex takes all remaining mass, including roundoff residue
            let mut v = top;
            v.sort_unstable();
            terms.push((w, v));
            return Ok(Decomposition { terms });
        }
        if alpha <= 0.0 {
            break;
        }
        let w_next = w - alpha;
        for &i in &top {
            let v = r[i] - alpha;
            let v = if v <= SNAP { 0.0 } else { v.min(w_next) };
            set_value(&mut order, &mut r, i, v);
        }
        if let Some((j, v)) = outside {
            if w_next - v <= SNAP {
                set_value(&mut order, &mut r, j, w_next);
            }
        }
        // coordinates already full stay full as w shrinks
        let full: Vec<usize> = order
            .iter()
            .take_while(|&&(Reverse(v), _)| v.0 > w_next)
            .map(|&(_, i)| i)
            .collect();
        for i in full {
            set_value(&mut order, &mut r, i, w_next);
        }
        let mut v = top;
        v.sort_unstable();
        terms.push((alpha, v));
        w = w_next;
    }
    Err(Error::InvalidArgument(
        "decomposition did not converge; point is numerically outside the hypersimplex".into(),
    ))
}

/// Randomized swap merge of two weighted bases given as sorted index lists.
/// Elements of `v1 ∖ v2` and `v2 ∖ v1` are paired in ascending order; each
/// pair keeps the `v1` side with probability `a1 / (a1 + a2)`.
pub fn merge_bases<R: Rng + ?Sized>(
    a1: f64,
    v1: &[usize],
    a2: f64,
    v2: &[usize],
    rng: &mut R,
) -> Result<(f64, Vec<usize>)> {
    if v1.len() != v2.len() {
        return Err(Error::InvalidArgument(format!(
            "bases have different sizes {} and {}",
            v1.len(),
            v2.len()
        )));
    }
    if !(a1 >= 0.0 && a2 >= 0.0 && a1 + a2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid merge weights {a1}, {a2}"
        )));
    }
    if v1.windows(2).any(|w| w[0] >= w[1]) || v2.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "bases must be strictly increasing".into(),
        ));
    }
    let mut merged = Vec::with_capacity(v1.len());
    let mut only1 = Vec::new();
    let mut only2 = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < v1.len() || b < v2.len() {
        match (v1.get(a), v2.get(b)) {
            (Some(&i), Some(&j)) if i == j => {
                merged.push(i);
                a += 1;
                b += 1;
            }
            (Some(&i), Some(&j)) if i < j => {
                only1.push(i);
                a += 1;
            }
            (Some(_), Some(&j)) => {
                only2.push(j);
                b += 1;
            }
            (Some(&i), None) => {
                only1.push(i);
                a += 1;
            }
            (None, Some(&j)) => {
                only2.push(j);
                b += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let p = a1 / (a1 + a2);
    for (&i, &j) in only1.iter().zip(&only2) {
        if rng.random::<f64>() < p {
            merged.push(i);
        } else {
            merged.push(j);
        }
    }
    merged.sort_unstable();
    Ok((a1 + a2, merged))
}

fn fold_merge<R: Rng + ?Sized>(dec: &Decomposition, rng: &mut R) -> Result<Vec<usize>> {
    let mut terms = dec.terms.iter();
    let (a, v) = terms
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty decomposition".into()))?;
    let mut acc = (*a, v.clone());
    for (a, v) in terms {
        acc = merge_bases(acc.0, &acc.1, *a, v, rng)?;
    }
    Ok(acc.1)
}

/// Rounds `x` to a `k`-subset whose inclusion probabilities equal `x`.
pub fn swap_round<R: Rng + ?Sized>(x: &FractionalPoint, rng: &mut R) -> Result<Vec<usize>> {
    fold_merge(&caratheodory_decompose(x)?, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub set: Vec<usize>,
    pub value: f64,
    pub trials: usize,
}

/// Best of `trials` independent swap roundings, by `C(S)`. The
/// decomposition is computed once; the first best draw wins ties.
pub fn round_best_of<R: Rng + ?Sized>(
    inst: &CoverageInstance,
    reward: &Reward,
    x: &FractionalPoint,
    trials: usize,
    rng: &mut R,
) -> Result<RoundResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "need at least one rounding trial".into(),
        ));
    }
    let dec = caratheodory_decompose(x)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..trials {
        let set = fold_merge(&dec, rng)?;
        let value = coverage_discrete(inst, reward, &set)?;
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, set));
        }
    }
    let (value, set) = best.unwrap();
    Ok(RoundResult { set, value, trials })
}
