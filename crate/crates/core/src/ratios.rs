//! Poisson concavity ratios
//! `α_φ(x) = E[φ(Pois(x))] / φ(x)` and `α_φ = inf_{x ≥ 1} α_φ(x)`.

use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::reward::Reward;

/// Minimum number of terms summed in the isoelastic series.
const ISOELASTIC_TERMS: u64 = 100;

/// Number of Poisson terms kept for rate `rate`.
pub fn truncation_point(rate: f64) -> u64 {
    (rate + 12.0 * rate.sqrt() + 30.0).ceil() as u64
}

fn ln_pmf(i: u64, rate: f64) -> f64 {
    i as f64 * rate.ln() - rate - ln_gamma(i as f64 + 1.0)
}

/// `E[φ(X)]` for `X ~ Pois(rate)` by a truncated series.
pub fn poisson_expectation(reward: &Reward, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Poisson rate must be positive, got {rate}"
        )));
    }
    Ok((0..=truncation_point(rate))
        .map(|i| reward.phi(i) * ln_pmf(i, rate).exp())
        .sum())
}

fn poisson(rate: f64) -> Result<Poisson> {
    Poisson::new(rate).map_err(|e| Error::InvalidArgument(format!("Poisson rate {rate}: {e}")))
}

/// `E[min(X, c)] = rate·P(X ≤ c-2) + c·P(X ≥ c)` for `X ~ Pois(rate)`.
pub fn expected_min_closed_form(rate: f64, c: u64) -> Result<f64> {
    let dist = poisson(rate)?;
    if c == 0 {
        return Ok(0.0);
    }
    let low = if c >= 2 { dist.cdf(c - 2) } else { 0.0 };
    Ok(rate * low + c as f64 * dist.sf(c - 1))
}

/// `d/d rate E[min(X, c)] = P(X ≤ c-1)`.
pub fn expected_min_derivative(rate: f64, c: u64) -> Result<f64> {
    if c == 0 {
        return Err(Error::InvalidArgument("derivative needs c >= 1".into()));
    }
    Ok(poisson(rate)?.cdf(c - 1))
}

/// `α_φ(x)` at a positive integer `x`.
pub fn alpha_at(reward: &Reward, x: u64) -> Result<f64> {
    if x == 0 {
        return Err(Error::InvalidArgument("alpha_at needs x >= 1".into()));
    }
    let denom = reward.phi(x);
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "phi({x}) = {denom} is not positive"
        )));
    }
    Ok(poisson_expectation(reward, x as f64)? / denom)
}

/// `(x, α_φ(x))` for `x = 1..=limit`.
pub fn alpha_curve(reward: &Reward, limit: u64) -> Result<Vec<(u64, f64)>> {
    (1..=limit).map(|x| Ok((x, alpha_at(reward, x)?))).collect()
}

/// `c^c e^{-c} / c!`, the Poisson mass at its mode `c`.
pub fn poisson_mode_mass(c: u64) -> f64 {
    ln_pmf(c, c as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaResult {
    pub value: f64,
    /// Integer point attaining the minimum (analytic for closed forms).
    pub argmin: u64,
    /// True when a numeric search found its minimum at the search limit, so
    /// the true infimum may lie further out.
    pub at_boundary: bool,
}

/// Search limit used when none is given: `10·max(scale, 10)` where the
/// scale is the saturation point or table length.
pub fn default_search_limit(reward: &Reward) -> u64 {
    let scale = match reward {
        Reward::MultiCoverage { c } | Reward::PiecewiseLinearDiscount { c, .. } => *c,
        Reward::Table { values } => values.len() as u64,
        Reward::Log | Reward::Isoelastic { .. } => 1,
    };
    10 * scale.max(10)
}

/// `α_φ`. Closed forms for multi-coverage, discounted and isoelastic
/// rewards; a scan over `x = 1..=search_limit` otherwise.
pub fn alpha(reward: &Reward, search_limit: Option<u64>) -> Result<AlphaResult> {
    let reward = reward.normalize()?;
    match reward {
        Reward::MultiCoverage { c } => Ok(AlphaResult {
            value: 1.0 - poisson_mode_mass(c),
            argmin: c,
            at_boundary: false,
        }),
        Reward::PiecewiseLinearDiscount { c, beta } => Ok(AlphaResult {
            value: 1.0 - (1.0 - beta) * poisson_mode_mass(c),
            argmin: c,
            at_boundary: false,
        }),
        Reward::Isoelastic { gamma } => Ok(AlphaResult {
            value: isoelastic_alpha_series(gamma)?,
            argmin: 1,
            at_boundary: false,
        }),
        Reward::Log | Reward::Table { .. } => {
            let limit = search_limit.unwrap_or_else(|| default_search_limit(&reward));
            if limit == 0 {
                return Err(Error::InvalidArgument(
                    "search limit must be at least 1".into(),
                ));
            }
            let mut best = AlphaResult {
                value: f64::INFINITY,
                argmin: 1,
                at_boundary: false,
            };
            for x in 1..=limit {
                let a = alpha_at(&reward, x)?;
                if a < best.value {
                    best.value = a;
                    best.argmin = x;
                }
                // α(x) ≥ 1 - 1/(x ln(1+x)), increasing in x, for the log reward
                if reward == Reward::Log {
                    let xf = x as f64;
                    if 1.0 - 1.0 / (xf * xf.ln_1p()) >= best.value {
                        break;
                    }
                }
            }
            best.at_boundary = best.argmin == limit;
            Ok(best)
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// `(1/e) Σ_{n≥1} n^{1-γ} / n!`.
pub fn isoelastic_alpha_series(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok((1..=ISOELASTIC_TERMS)
        .map(|n| ((1.0 - gamma) * (n as f64).ln() - ln_gamma(n as f64 + 1.0) - 1.0).exp())
        .sum())
}

/// `(1/(e Γ(γ))) ∫_0^1 e^x (-ln x)^{γ-1} dx`, evaluated after substituting
/// `x = exp(-t^{1/γ})`, which turns it into
/// `(1/(γ e Γ(γ))) ∫_0^∞ exp(e^{-u}) e^{-u} dt` with `u = t^{1/γ}`.
pub fn isoelastic_alpha_integral(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    // e^{-u} < 2e-22 beyond u = 50
    let upper = 50f64.powf(gamma);
    let integrand = |t: f64| {
        let u = t.powf(1.0 / gamma);
        let decay = (-u).exp();
        decay.exp() * decay
    };
    let out = quadrature::integrate(integrand, 0.0, upper, 1e-14);
    Ok(out.integral / (gamma * std::f64::consts::E * self::gamma(gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INV_E: f64 = 0.36787944117144233;

    #[test]
    fn expectation_examples() {
        let v = poisson_expectation(&Reward::MultiCoverage { c: 1 }, 1.0).unwrap();
        assert!((v - (1.0 - INV_E)).abs() < 1e-12);
        let linear = Reward::Table {
            values: (0..500).map(f64::from).collect(),
        };
        for rate in [0.5, 3.0, 40.0] {
            assert!((poisson_expectation(&linear, rate).unwrap() - rate).abs() < 1e-10);
        }
        let a = poisson_expectation(&Reward::MultiCoverage { c: 2 }, 2.0).unwrap();
        assert!((a - expected_min_closed_form(2.0, 2).unwrap()).abs() < 1e-10);
        assert!(poisson_expectation(&Reward::Log, 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!((expected_min_closed_form(1.0, 1).unwrap() - (1.0 - INV_E)).abs() < 1e-12);
        assert_eq!(expected_min_closed_form(3.0, 0).unwrap(), 0.0);
        assert!((expected_min_derivative(1.0, 1).unwrap() - INV_E).abs() < 1e-12);
        assert!((expected_min_derivative(5.0, 200).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_at_examples() {
        assert!((alpha_at(&Reward::MultiCoverage { c: 1 }, 1).unwrap() - 0.6321).abs() < 1e-4);
        assert!((alpha_at(&Reward::Log, 2).unwrap() - 0.8902).abs() < 1e-4);
        let linear = Reward::Table {
            values: (0..400).map(f64::from).collect(),
        };
        for x in [1, 7, 50] {
            assert!((alpha_at(&linear, x).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(alpha_at(&Reward::Log, 0).is_err());
    }

    #[test]
    fn discount_endpoints() {
        for c in [1, 3, 9] {
            let full = alpha(&Reward::PiecewiseLinearDiscount { c, beta: 1.0 }, None).unwrap();
            assert_eq!(full.value, 1.0);
            let none = alpha(&Reward::PiecewiseLinearDiscount { c, beta: 0.0 }, None).unwrap();
            let mc = alpha(&Reward::MultiCoverage { c }, None).unwrap();
            assert_eq!(none.value, mc.value);
        }
    }

    #[test]
    fn closed_forms_match_scan() {
        for c in 1..=6u64 {
            let closed = alpha(&Reward::MultiCoverage { c }, None).unwrap().value;
            let table: Vec<f64> = (0..=c).map(|i| i as f64).collect();
            let scanned = alpha(&Reward::Table { values: table }, Some(5 * c)).unwrap();
            assert!((closed - scanned.value).abs() < 1e-12);
            assert_eq!(scanned.argmin, c);
        }
    }

    #[test]
    fn multi_coverage_minimum_at_c() {
        for c in 1..=12u64 {
            let reward = Reward::MultiCoverage { c };
            let curve = alpha_curve(&reward, 5 * c).unwrap();
            let (arg, _) = curve
                .iter()
                .copied()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert_eq!(arg, c);
        }
    }

    #[test]
    fn log_search_stops_early() {
        let r = alpha(&Reward::Log, None).unwrap();
        assert_eq!(r.argmin, 1);
        assert!(!r.at_boundary);
    }

    #[test]
    fn boundary_flag() {
        let r = Reward::Table {
            values: vec![0.0, 1.0, 2.0, 3.0, 4.0],
        };
        let res = alpha(&r, Some(3)).unwrap();
        assert!(res.at_boundary);
        assert_eq!(res.argmin, 3);
    }

    #[test]
    fn isoelastic_near_one_recovers_coverage() {
        let v = isoelastic_alpha_integral(0.999).unwrap();
        assert!((v - (1.0 - INV_E)).abs() < 2e-3, "{v}");
        assert!(isoelastic_alpha_integral(1.0).is_err());
        assert!(isoelastic_alpha_series(0.0).is_err());
    }

    #[test]
    fn isoelastic_series_matches_expectation() {
        for g in [0.2, 0.5, 0.8] {
            let e = poisson_expectation(&Reward::Isoelastic { gamma: g }, 1.0).unwrap();
            assert!((isoelastic_alpha_series(g).unwrap() - e).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_series(rate in 0.05f64..60.0, c in 0u64..40) {
            let min_c = Reward::Table { values: (0..=c).map(|i| i as f64).collect() };
            let series = poisson_expectation(&min_c, rate).unwrap();
            let closed = expected_min_closed_form(rate, c).unwrap();
            prop_assert!((series - closed).abs() < 1e-10);
        }

        #[test]
        fn derivative_matches_finite_difference(rate in 0.5f64..30.0, c in 1u64..30) {
            let h = 1e-5;
            let fd = (expected_min_closed_form(rate + h, c).unwrap()
                - expected_min_closed_form(rate - h, c).unwrap()) / (2.0 * h);
            prop_assert!((fd - expected_min_derivative(rate, c).unwrap()).abs() < 1e-6);
        }
    }
}
