//! Concave, nondecreasing reward functions `φ` with `φ(0) = 0`, `φ(1) = 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative tolerance for the concavity and monotonicity checks on tables.
const TABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Reward {
    /// `min(i, c)`.
    MultiCoverage { c: u64 },
    /// `ln(1 + i) / ln 2`.
    Log,
    /// `i^(1 - γ)` for `γ ∈ (0, 1)`.
    Isoelastic { gamma: f64 },
    /// `β i + (1 - β) min(i, c)`.
    PiecewiseLinearDiscount { c: u64, beta: f64 },
    /// Explicit values `φ(0), φ(1), ...`, constant beyond the last entry.
    Table { values: Vec<f64> },
}

impl Reward {
    pub fn multi_coverage(c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidReward("multi-coverage needs c >= 1".into()));
        }
        Ok(Self::MultiCoverage { c })
    }

    pub fn isoelastic(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidReward(format!(
                "isoelastic gamma must lie in (0, 1), got {gamma}"
            )));
        }
        Ok(Self::Isoelastic { gamma })
    }

    pub fn piecewise_linear_discount(c: u64, beta: f64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidReward("discount reward needs c >= 1".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidReward(format!(
                "discount beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self::PiecewiseLinearDiscount { c, beta })
    }

    /// Raw table reward. Values must be finite, nondecreasing and concave;
    /// they are not normalized here (see [`Reward::normalize`]).
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidReward("table reward is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidReward(
                "table reward has a non-finite value".into(),
            ));
        }
        let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = TABLE_TOL * scale;
        let slopes: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = slopes.iter().position(|&s| s < -tol) {
            return Err(Error::InvalidReward(format!(
                "table reward decreases between entries {i} and {}",
                i + 1
            )));
        }
        if let Some(i) = slopes.windows(2).position(|w| w[1] > w[0] + tol) {
            return Err(Error::InvalidReward(format!(
                "table reward is not concave at entry {}",
                i + 1
            )));
        }
        Ok(Self::Table { values })
    }

    /// `φ(i)`.
    pub fn phi(&self, i: u64) -> f64 {
        match self {
            Self::MultiCoverage { c } => i.min(*c) as f64,
            Self::Log => (i as f64).ln_1p() / std::f64::consts::LN_2,
            Self::Isoelastic { gamma } => {
                if i == 0 {
                    0.0
                } else {
                    (i as f64).powf(1.0 - gamma)
                }
            }
            Self::PiecewiseLinearDiscount { c, beta } => {
                beta * i as f64 + (1.0 - beta) * i.min(*c) as f64
            }
            Self::Table { values } => {
                let idx = (i as usize).min(values.len() - 1);
                values[idx]
            }
        }
    }

    /// `s(i) = φ(i) - φ(i - 1)` for `i >= 1`.
    pub fn slope(&self, i: u64) -> f64 {
        assert!(i >= 1, "slope is defined for i >= 1");
        self.phi(i) - self.phi(i - 1)
    }

    /// Piecewise-linear interpolation of `φ` between consecutive integers.
    pub fn extended_phi(&self, x: f64) -> f64 {
        let fl = x.floor();
        let frac = x - fl;
        let base = fl as u64;
        let lo = self.phi(base);
        if frac == 0.0 {
            return lo;
        }
        (1.0 - frac) * lo + frac * self.phi(base + 1)
    }

    /// Affinely rescales so that `φ(0) = 0` and `φ(1) = 1`. Closed-form
    /// variants are already normalized and returned unchanged.
    pub fn normalize(&self) -> Result<Self> {
        let (p0, p1) = (self.phi(0), self.phi(1));
        if !(p1 > p0) {
            return Err(Error::InvalidReward(format!(
                "degenerate reward: phi(1) = {p1} does not exceed phi(0) = {p0}"
            )));
        }
        match self {
            Self::Table { values } => {
                if p0 == 0.0 && p1 == 1.0 {
                    return Ok(self.clone());
                }
                let span = p1 - p0;
                Ok(Self::Table {
                    values: values.iter().map(|v| (v - p0) / span).collect(),
                })
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.phi(0) == 0.0 && (self.phi(1) - 1.0).abs() <= 1e-12
    }

    /// Smallest `i` from which `φ` stays constant, if any.
    pub fn saturation_index(&self) -> Option<u64> {
        match self {
            Self::MultiCoverage { c } => Some(*c),
            Self::PiecewiseLinearDiscount { c, beta } if *beta == 0.0 => Some(*c),
            Self::Table { values } => {
                let last = *values.last().unwrap();
                let first_const = values.iter().rposition(|&v| v != last).map_or(0, |p| p + 1);
                Some(first_const as u64)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MultiCoverage { c } => write!(f, "min:c={c}"),
            Self::Log => write!(f, "log"),
            Self::Isoelastic { gamma } => write!(f, "pow:gamma={gamma}"),
            Self::PiecewiseLinearDiscount { c, beta } => write!(f, "plin:c={c},beta={beta}"),
            Self::Table { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Reward {
    type Err = Error;

    /// Parses `min:c=<int>`, `log`, `pow:gamma=<real>`,
    /// `plin:c=<int>,beta=<real>` or `table:<v0,v1,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad = |msg: &str| Error::InvalidReward(format!("reward `{s}`: {msg}"));
        let params = || -> Result<Vec<(&str, &str)>> {
            rest.split(',')
                .filter(|p| !p.is_empty())
                .map(|p| p.split_once('=').ok_or_else(|| bad("expected key=value")))
                .collect()
        };
        let lookup = |params: &[(&str, &str)], key: &str| -> Result<String> {
            params
                .iter()
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim().to_string())
                .ok_or_else(|| bad(&format!("missing `{key}`")))
        };
        match kind {
            "min" => {
                let p = params()?;
                let c = lookup(&p, "c")?
                    .parse()
                    .map_err(|_| bad("c must be an integer"))?;
                Self::multi_coverage(c)
            }
            "log" if rest.is_empty() => Ok(Self::Log),
            "pow" => {
                let p = params()?;
                let g = lookup(&p, "gamma")?
                    .parse()
                    .map_err(|_| bad("gamma must be a number"))?;
                Self::isoelastic(g)
            }
            "plin" => {
                let p = params()?;
                let c = lookup(&p, "c")?
                    .parse()
                    .map_err(|_| bad("c must be an integer"))?;
                let beta = lookup(&p, "beta")?
                    .parse()
                    .map_err(|_| bad("beta must be a number"))?;
                Self::piecewise_linear_discount(c, beta)
            }
            "table" => {
                let values = rest
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| bad("table values must be numbers"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::table(values)
            }
            _ => Err(bad("unknown reward kind")),
        }
    }
}
