//! Brute-force reference implementations. Slow by design and written
//! independently of the routines they check.

use crate::error::{Error, Result};
use crate::instance::CoverageInstance;
use crate::objective::smooth_value;
use crate::reward::Reward;

/// Largest number of subsets [`brute_force_opt`] will enumerate.
pub const MAX_SUBSETS: u128 = 10_000_000;
pub const MAX_REFERENCE_PROJECT_N: usize = 2_000;
pub const MAX_EXHAUSTIVE_N: usize = 20;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

/// Coverage of a membership mask, recomputed from scratch.
fn mask_value(inst: &CoverageInstance, reward: &Reward, member: &[bool]) -> f64 {
    let mut total = 0.0;
    for j in 0..inst.r() {
        let mut hits = 0u64;
        for &i in inst.neighbors(j) {
            if member[i] {
                hits += 1;
            }
        }
        total += inst.weights()[j] * reward.phi(hits);
    }
    total
}

/// Exact `max_{|S| = k} C(S)`, with the lexicographically smallest maximizer.
pub fn brute_force_opt(
    inst: &CoverageInstance,
    reward: &Reward,
    k: usize,
) -> Result<(f64, Vec<usize>)> {
    let n = inst.n();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "budget {k} exceeds n = {n}"
        )));
    }
    let count = binomial(n, k);
    if count > MAX_SUBSETS {
        return Err(Error::TooLarge(format!(
            "C({n}, {k}) = {count} subsets exceeds the limit of {MAX_SUBSETS}"
        )));
    }
    let mut combo: Vec<usize> = (0..k).collect();
    let mut member = vec![false; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        member.fill(false);
        for &i in &combo {
            member[i] = true;
        }
        let v = mask_value(inst, reward, &member);
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, combo.clone()));
        }
        // next combination in lexicographic order
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(best.unwrap());
            }
            pos -= 1;
            if combo[pos] < n - k + pos {
                break;
            }
        }
        combo[pos] += 1;
        for t in pos + 1..k {
            combo[t] = combo[t - 1] + 1;
        }
    }
}

/// Euclidean projection onto the hypersimplex by scanning every interval
/// between consecutive breakpoints, `O(n^2)`.
pub fn reference_project(x: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n > MAX_REFERENCE_PROJECT_N {
        return Err(Error::TooLarge(format!(
            "reference projection limited to n <= {MAX_REFERENCE_PROJECT_N}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "budget {k} exceeds n = {n}"
        )));
    }
    if k == 0 || k == n {
        return Ok(vec![if k == 0 { 0.0 } else { 1.0 }; n]);
    }
    let shift =
        |lambda: f64| -> Vec<f64> { x.iter().map(|&v| (v - lambda).clamp(0.0, 1.0)).collect() };
    let total = |lambda: f64| -> f64 {
        let mut s = 0.0;
        for &v in x {
            s += (v - lambda).clamp(0.0, 1.0);
        }
        s
    };
    let mut bps: Vec<f64> = x.iter().flat_map(|&v| [v - 1.0, v]).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let kf = k as f64;
    for &b in &bps {
        if total(b) == kf {
            return Ok(shift(b));
        }
    }
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if total(a) >= kf && kf >= total(b) {
            // inside (a, b) each coordinate is fixed at 0, fixed at 1, or free
            let mid = 0.5 * (a + b);
            let mut ones = 0.0;
            let mut free_sum = 0.0;
            let mut free = 0usize;
            for &v in x {
                if v - mid >= 1.0 {
                    ones += 1.0;
                } else if v - mid > 0.0 {
                    free_sum += v;
                    free += 1;
                }
            }
            let lambda = if free == 0 {
                a
            } else {
                (ones + free_sum - kf) / free as f64
            };
            return Ok(shift(lambda));
        }
    }
    Err(Error::InvalidArgument(
        "no bracketing breakpoints found".into(),
    ))
}

/// Central finite differences of `C̃_μ` with step `h`.
pub fn fd_gradient(
    inst: &CoverageInstance,
    reward: &Reward,
    x: &[f64],
    mu: f64,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = smooth_value(inst, reward, &probe, mu)?;
        probe[i] = x[i] - h;
        let down = smooth_value(inst, reward, &probe, mu)?;
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// `Σ_S C(S) Π_{i∈S} x_i Π_{i∉S} (1 - x_i)` over all `2^n` subsets.
pub fn exhaustive_multilinear(inst: &CoverageInstance, reward: &Reward, x: &[f64]) -> Result<f64> {
    let n = inst.n();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge(format!(
            "exhaustive enumeration limited to n <= {MAX_EXHAUSTIVE_N}"
        )));
    }
    if x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, expected {n}",
            x.len()
        )));
    }
    let mut member = vec![false; n];
    let mut total = 0.0;
    for bits in 0u32..(1u32 << n) {
        let mut prob = 1.0;
        for (i, m) in member.iter_mut().enumerate() {
            *m = bits >> i & 1 == 1;
            prob *= if *m { x[i] } else { 1.0 - x[i] };
        }
        if prob != 0.0 {
            total += prob * mask_value(inst, reward, &member);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::multilinear_extension;
    use crate::solver::hypersimplex_project;
    use proptest::prelude::*;

    fn star() -> CoverageInstance {
        let nb = vec![vec![0, 1], vec![0, 2], vec![0, 3]];
        CoverageInstance::from_neighborhoods(4, &nb, vec![1.0; 3]).unwrap()
    }

    #[test]
    fn opt_examples() {
        let inst = star();
        let r = Reward::MultiCoverage { c: 1 };
        assert_eq!(brute_force_opt(&inst, &r, 1).unwrap(), (3.0, vec![0]));
        let all = brute_force_opt(&inst, &r, 4).unwrap();
        assert_eq!(all, (3.0, vec![0, 1, 2, 3]));
        assert_eq!(brute_force_opt(&inst, &r, 0).unwrap(), (0.0, vec![]));
        // ties resolve to the lexicographically smallest set
        assert_eq!(brute_force_opt(&inst, &r, 2).unwrap(), (3.0, vec![0, 1]));
    }

    #[test]
    fn opt_guard() {
        let nb: Vec<Vec<usize>> = vec![(0..60).collect()];
        let inst = CoverageInstance::from_neighborhoods(60, &nb, vec![1.0]).unwrap();
        assert!(matches!(
            brute_force_opt(&inst, &Reward::Log, 30),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn reference_project_examples() {
        let inside = [0.25, 0.75, 0.5, 0.5];
        assert_eq!(reference_project(&inside, 2).unwrap(), inside.to_vec());
        let p = reference_project(&[3.0, 3.0, 3.0, 3.0], 2).unwrap();
        assert_eq!(p, vec![0.5; 4]);
        let p = reference_project(&[0.2, 0.4, 0.9], 2).unwrap();
        for (a, b) in p.iter().zip([0.4, 0.6, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_examples() {
        let inst = star();
        let r = Reward::Log;
        assert_eq!(exhaustive_multilinear(&inst, &r, &[0.0; 4]).unwrap(), 0.0);
        let v = exhaustive_multilinear(&inst, &r, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((v - (1.0 + r.phi(2) + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn fd_examples() {
        let inst = CoverageInstance::from_neighborhoods(2, &[vec![1]], vec![1.0]).unwrap();
        let g = fd_gradient(
            &inst,
            &Reward::MultiCoverage { c: 1 },
            &[0.3, 0.4],
            0.05,
            1e-6,
        )
        .unwrap();
        assert!(g[0].abs() < 1e-9 && (g[1] - 1.0).abs() < 1e-9);
    }

    fn small_instance() -> impl Strategy<Value = (CoverageInstance, Vec<f64>)> {
        (1usize..=12, 1usize..8).prop_flat_map(|(n, r)| {
            let nbrs = proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=n), r);
            let w = proptest::collection::vec(0.05f64..1.0, r);
            let x = proptest::collection::vec(0.0f64..=1.0, n);
            (nbrs, w, x).prop_map(move |(nbrs, w, x)| {
                let nb: Vec<Vec<usize>> =
                    nbrs.into_iter().map(|s| s.into_iter().collect()).collect();
                (CoverageInstance::from_neighborhoods(n, &nb, w).unwrap(), x)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn convolution_matches_enumeration((inst, x) in small_instance(), c in 1u64..4) {
            for r in [Reward::MultiCoverage { c }, Reward::Log] {
                let a = exhaustive_multilinear(&inst, &r, &x).unwrap();
                let b = multilinear_extension(&inst, &r, &x).unwrap();
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn fast_projection_matches_reference(
            (x, k) in (1usize..60).prop_flat_map(|n| (proptest::collection::vec(-2.0f64..3.0, n), 0..=n))
        ) {
            let fast = hypersimplex_project(&x, k).unwrap();
            let slow = reference_project(&x, k).unwrap();
            for (a, b) in fast.x().iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
