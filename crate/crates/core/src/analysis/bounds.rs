//! Closed-form tail bounds for `d`-dimensional sample means and Gaussians.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which tail inequality a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    /// Sub-Gaussian sample mean of `n` draws, deviation `a`.
    Chernoff,
    /// Gaussian upper tails at `z` standard deviations.
    Concentration,
    /// Gaussian lower bound on the joint upper tail at `z` standard deviations.
    AntiConcentration,
}

/// Shape of the event, relative to the shifted mean `μ + a` (or `μ + zσ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Every coordinate exceeds its threshold.
    Dominate,
    /// At least one coordinate reaches its threshold.
    NotDominatedBy,
    /// At least one coordinate leaves the box of half-width `a` (or `zσ`).
    BallExit,
}

impl Fact {
    pub const ALL: [Fact; 3] = [Fact::Chernoff, Fact::Concentration, Fact::AntiConcentration];

    pub fn as_str(self) -> &'static str {
        match self {
            Fact::Chernoff => "chernoff",
            Fact::Concentration => "concentration",
            Fact::AntiConcentration => "anti_concentration",
        }
    }

    /// Variants for which this fact states a bound.
    pub fn variants(self) -> &'static [Variant] {
        match self {
            Fact::AntiConcentration => &[Variant::Dominate],
            _ => &[Variant::Dominate, Variant::NotDominatedBy, Variant::BallExit],
        }
    }

    /// Upper bounds everywhere except anti-concentration.
    pub fn is_lower_bound(self) -> bool {
        self == Fact::AntiConcentration
    }
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dominate => "dominate",
            Variant::NotDominatedBy => "not_dominated_by",
            Variant::BallExit => "ball_exit",
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fact {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fact::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Unknown { kind: "fact", name: s.to_owned() })
    }
}

/// Parameters of one tail-bound evaluation.
///
/// `deviation` is `a` for [`Fact::Chernoff`] and `z` otherwise; `n` only
/// matters for Chernoff and `sigma` only scales the simulated draws of the
/// Gaussian facts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub fact: Fact,
    pub variant: Variant,
    pub d: usize,
    pub sigma: f64,
    pub n: u64,
    pub deviation: f64,
}

impl BoundQuery {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("d must be >= 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if !self.fact.variants().contains(&self.variant) {
            return Err(Error::invalid(format!(
                "{} has no `{}` variant",
                self.fact, self.variant
            )));
        }
        match self.fact {
            Fact::Chernoff if !(self.deviation.is_finite() && self.deviation >= 0.0) => {
                Err(Error::invalid(format!("a must be >= 0, got {}", self.deviation)))
            }
            Fact::Concentration | Fact::AntiConcentration if !(self.deviation.is_finite() && self.deviation >= 1.0) => {
                Err(Error::invalid(format!("z must be >= 1, got {}", self.deviation)))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form value for this query.
    pub fn bound(&self) -> Result<f64> {
        match self.fact {
            Fact::Chernoff => chernoff_bound(self),
            Fact::Concentration => gaussian_concentration_bound(self),
            Fact::AntiConcentration => anti_concentration_bound(self),
        }
    }
}

fn check_fact(q: &BoundQuery, fact: Fact) -> Result<()> {
    if q.fact != fact {
        return Err(Error::invalid(format!("query is for {}, not {fact}", q.fact)));
    }
    q.validate()
}

/// Tail bounds on the sample mean of `n` i.i.d. `σ`-sub-Gaussian vectors, capped at 1.
pub fn chernoff_bound(q: &BoundQuery) -> Result<f64> {
    check_fact(q, Fact::Chernoff)?;
    let d = q.d as f64;
    let e = q.n as f64 * q.deviation * q.deviation / (2.0 * q.sigma * q.sigma);
    let b = match q.variant {
        Variant::Dominate => (-d * e).exp(),
        Variant::NotDominatedBy => d * (-e).exp(),
        Variant::BallExit => 2.0 * d * (-e).exp(),
    };
    Ok(b.min(1.0))
}

/// Gaussian tail bounds at `z ≥ 1` standard deviations, capped at 1.
pub fn gaussian_concentration_bound(q: &BoundQuery) -> Result<f64> {
    check_fact(q, Fact::Concentration)?;
    let d = q.d as f64;
    let t = (-q.deviation * q.deviation / 2.0).exp();
    let b = match q.variant {
        Variant::Dominate => (t / 4.0).powi(q.d as i32),
        Variant::NotDominatedBy => d / 4.0 * t,
        Variant::BallExit => d / 2.0 * t,
    };
    Ok(b.min(1.0))
}

/// Lower bound on `Pr[X ≻ μ + z √diag(Σ)]` for a Gaussian with diagonal covariance.
pub fn anti_concentration_bound(q: &BoundQuery) -> Result<f64> {
    check_fact(q, Fact::AntiConcentration)?;
    let z = q.deviation;
    let one = z / ((2.0 * PI).sqrt() * (z * z + 1.0)) * (-z * z / 2.0).exp();
    Ok(one.powi(q.d as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn q(fact: Fact, variant: Variant, d: usize, sigma: f64, n: u64, deviation: f64) -> BoundQuery {
        BoundQuery { fact, variant, d, sigma, n, deviation }
    }

    #[test]
    fn chernoff_examples() {
        let b = chernoff_bound(&q(Fact::Chernoff, Variant::BallExit, 2, 0.5, 100, 0.1)).unwrap();
        assert!((b - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((b - 0.5413).abs() < 1e-4);
        for v in Fact::Chernoff.variants() {
            assert_eq!(chernoff_bound(&q(Fact::Chernoff, *v, 3, 0.5, 10, 0.0)).unwrap(), 1.0);
        }
        let b1 = chernoff_bound(&q(Fact::Chernoff, Variant::BallExit, 1, 0.7, 40, 0.3)).unwrap();
        assert!((b1 - 2.0 * (-40.0f64 * 0.09 / (2.0 * 0.49)).exp()).abs() < 1e-15);
    }

    #[test]
    fn concentration_examples() {
        let b = gaussian_concentration_bound(&q(Fact::Concentration, Variant::BallExit, 1, 1.0, 1, 2.0)).unwrap();
        assert!((b - 0.0677).abs() < 1e-4);
        let b = gaussian_concentration_bound(&q(Fact::Concentration, Variant::NotDominatedBy, 3, 1.0, 1, 1.0)).unwrap();
        assert!((b - 0.4549).abs() < 1e-4);
        assert!(gaussian_concentration_bound(&q(Fact::Concentration, Variant::BallExit, 1, 1.0, 1, 0.5)).is_err());
    }

    #[test]
    fn concentration_is_not_a_bound_at_z_one() {
        // The one-sided tail at z = 1 exceeds e^{-1/2}/4, so the joint bound
        // fails for d = 1 right at the edge of its stated domain.
        let tail = 1.0 - Normal::standard().cdf(1.0);
        let b = gaussian_concentration_bound(&q(Fact::Concentration, Variant::Dominate, 1, 1.0, 1, 1.0)).unwrap();
        assert!(tail > b);
        let b2 = gaussian_concentration_bound(&q(Fact::Concentration, Variant::Dominate, 1, 1.0, 1, 2.0)).unwrap();
        assert!(1.0 - Normal::standard().cdf(2.0) < b2);
    }

    #[test]
    fn anti_concentration_examples() {
        let b = anti_concentration_bound(&q(Fact::AntiConcentration, Variant::Dominate, 1, 1.0, 1, 1.0)).unwrap();
        assert!((b - (-0.5f64).exp() / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-15);
        assert!((b - 0.1210).abs() < 1e-4);
        let b2 = anti_concentration_bound(&q(Fact::AntiConcentration, Variant::Dominate, 2, 1.0, 1, 1.0)).unwrap();
        assert!((b2 - 0.01464).abs() < 1e-5);
        let normal = Normal::standard();
        for d in 1..=4 {
            for z in [1.0, 1.5, 2.0, 3.0, 5.0] {
                let exact = (1.0 - normal.cdf(z)).powi(d as i32);
                let b = anti_concentration_bound(&q(Fact::AntiConcentration, Variant::Dominate, d, 1.0, 1, z)).unwrap();
                assert!(b < exact, "d={d} z={z}");
            }
        }
        assert!(anti_concentration_bound(&q(Fact::AntiConcentration, Variant::BallExit, 1, 1.0, 1, 1.0)).is_err());
    }

    #[test]
    fn monotonicity() {
        for v in Fact::Chernoff.variants() {
            let mut prev = f64::INFINITY;
            for n in [1, 5, 20, 80, 320] {
                let b = chernoff_bound(&q(Fact::Chernoff, *v, 2, 0.5, n, 0.1)).unwrap();
                assert!(b <= prev);
                prev = b;
            }
            let mut prev = f64::INFINITY;
            for a in [0.0, 0.05, 0.1, 0.2, 0.4] {
                let b = chernoff_bound(&q(Fact::Chernoff, *v, 2, 0.5, 30, a)).unwrap();
                assert!(b <= prev);
                prev = b;
            }
        }
        for v in Fact::Concentration.variants() {
            let mut prev = f64::INFINITY;
            for z in [1.0, 1.5, 2.0, 3.0] {
                let b = gaussian_concentration_bound(&q(Fact::Concentration, *v, 3, 1.0, 1, z)).unwrap();
                assert!(b < prev);
                prev = b;
            }
        }
    }

    #[test]
    fn fact_parsing_and_mismatch() {
        assert_eq!("anti_concentration".parse::<Fact>().unwrap(), Fact::AntiConcentration);
        assert!("nope".parse::<Fact>().is_err());
        assert!(chernoff_bound(&q(Fact::Concentration, Variant::Dominate, 1, 1.0, 1, 1.0)).is_err());
        assert!(chernoff_bound(&q(Fact::Chernoff, Variant::Dominate, 0, 1.0, 1, 1.0)).is_err());
    }
}
