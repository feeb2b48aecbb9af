//! Scalarization families, gap tables and preference-radius algebra.
//!
//! A preference radius `ρ_a` is a per-action tolerance: if every estimate
//! stays inside the open ball `B(μ_a, ρ_a)` then the set of preferred
//! actions does not change. [`certify_radii`] checks a candidate assignment
//! by comparing the infimum of `f` over the optimal action's ball with the
//! supremum over each suboptimal action's ball.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::objective::{ActionSet, ObjectiveVector};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Nonnegative weights in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("weights must not be empty"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && (0.0..=1.0).contains(*w))) {
            return Err(Error::config(format!("weight {w} outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::config(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// ε-constraint scalarization: `x_ℓ` when every other coordinate meets its
/// threshold (`x_i >= ε_i`), zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonConstraint {
    target: usize,
    thresholds: Vec<Option<f64>>,
}

impl EpsilonConstraint {
    /// `target` and the threshold indices are zero-based here; the JSON form is one-based.
    pub fn new(dim: usize, target: usize, thresholds: &[(usize, f64)]) -> Result<Self> {
        if dim == 0 || target >= dim {
            return Err(Error::config(format!("target objective {} outside 1..={dim}", target + 1)));
        }
        let mut slots = vec![None; dim];
        for &(i, eps) in thresholds {
            if i >= dim || i == target {
                return Err(Error::config(format!("no constraint allowed on objective {}", i + 1)));
            }
            if !(eps.is_finite() && (0.0..=1.0).contains(&eps)) {
                return Err(Error::config(format!("epsilon {eps} outside [0, 1]")));
            }
            if slots[i].replace(eps).is_some() {
                return Err(Error::config(format!("duplicate constraint on objective {}", i + 1)));
            }
        }
        if let Some(missing) = (0..dim).find(|&i| i != target && slots[i].is_none()) {
            return Err(Error::config(format!("missing epsilon for objective {}", missing + 1)));
        }
        Ok(Self { target, thresholds: slots })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn dim(&self) -> usize {
        self.thresholds.len()
    }

    /// `(index, ε_i)` for every constrained objective.
    pub fn constraints(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.thresholds.iter().enumerate().filter_map(|(i, e)| e.map(|e| (i, e)))
    }

    fn feasible(&self, x: &[f64]) -> bool {
        self.constraints().all(|(i, eps)| x[i] >= eps)
    }
}

/// A scalarization (preference) function over objective space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PreferenceConfig", into = "PreferenceConfig")]
pub enum Preference {
    Linear(Weights),
    Chebyshev(Weights),
    WeightedLp { weights: Weights, p: f64 },
    EpsilonConstraint(EpsilonConstraint),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum PreferenceConfig {
    Linear {
        weights: Vec<f64>,
    },
    Chebyshev {
        weights: Vec<f64>,
    },
    WeightedLp {
        weights: Vec<f64>,
        p: f64,
    },
    EpsilonConstraint {
        target: usize,
        epsilons: BTreeMap<String, f64>,
    },
}

impl TryFrom<PreferenceConfig> for Preference {
    type Error = Error;

    fn try_from(cfg: PreferenceConfig) -> Result<Self> {
        match cfg {
            PreferenceConfig::Linear { weights } => Ok(Preference::Linear(Weights::new(weights)?)),
            PreferenceConfig::Chebyshev { weights } => Ok(Preference::Chebyshev(Weights::new(weights)?)),
            PreferenceConfig::WeightedLp { weights, p } => Preference::weighted_lp(weights, p),
            PreferenceConfig::EpsilonConstraint { target, epsilons } => {
                let mut parsed = Vec::with_capacity(epsilons.len());
                for (key, eps) in epsilons {
                    let idx: usize = key
                        .parse()
                        .map_err(|_| Error::config(format!("epsilon key `{key}` is not an objective index")))?;
                    if idx == 0 {
                        return Err(Error::config("objective indices are one-based"));
                    }
                    parsed.push((idx, eps));
                }
                if target == 0 {
                    return Err(Error::config("objective indices are one-based"));
                }
                Preference::epsilon_constraint(parsed.len() + 1, target, &parsed)
            }
        }
    }
}

impl From<Preference> for PreferenceConfig {
    fn from(p: Preference) -> Self {
        match p {
            Preference::Linear(w) => PreferenceConfig::Linear { weights: w.0 },
            Preference::Chebyshev(w) => PreferenceConfig::Chebyshev { weights: w.0 },
            Preference::WeightedLp { weights, p } => PreferenceConfig::WeightedLp { weights: weights.0, p },
            Preference::EpsilonConstraint(ec) => PreferenceConfig::EpsilonConstraint {
                target: ec.target + 1,
                epsilons: ec.constraints().map(|(i, e)| ((i + 1).to_string(), e)).collect(),
            },
        }
    }
}

impl Preference {
    pub fn linear(weights: Vec<f64>) -> Result<Self> {
        Ok(Preference::Linear(Weights::new(weights)?))
    }

    pub fn chebyshev(weights: Vec<f64>) -> Result<Self> {
        Ok(Preference::Chebyshev(Weights::new(weights)?))
    }

    pub fn weighted_lp(weights: Vec<f64>, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::config(format!("L_p exponent must be finite and >= 1, got {p}")));
        }
        Ok(Preference::WeightedLp { weights: Weights::new(weights)?, p })
    }

    /// One-based `target` and constraint indices, as written in configs.
    pub fn epsilon_constraint(dim: usize, target: usize, epsilons: &[(usize, f64)]) -> Result<Self> {
        if target == 0 || epsilons.iter().any(|&(i, _)| i == 0) {
            return Err(Error::config("objective indices are one-based"));
        }
        let zero_based: Vec<_> = epsilons.iter().map(|&(i, e)| (i - 1, e)).collect();
        Ok(Preference::EpsilonConstraint(EpsilonConstraint::new(dim, target - 1, &zero_based)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Preference::Linear(w) | Preference::Chebyshev(w) => w.0.len(),
            Preference::WeightedLp { weights, .. } => weights.0.len(),
            Preference::EpsilonConstraint(ec) => ec.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Preference::Linear(_) => "linear",
            Preference::Chebyshev(_) => "chebyshev",
            Preference::WeightedLp { .. } => "weighted_lp",
            Preference::EpsilonConstraint(_) => "epsilon_constraint",
        }
    }

    /// Evaluates `f(x)`. Weighted `L_p` is only defined for nonnegative inputs.
    pub fn evaluate(&self, x: &ObjectiveVector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        if let Preference::WeightedLp { .. } = self {
            if let Some(neg) = x.as_slice().iter().find(|v| **v < 0.0) {
                return Err(Error::invalid(format!("weighted L_p undefined for negative coordinate {neg}")));
            }
        }
        Ok(self.score(x.as_slice()))
    }

    /// Total, monotone version of [`evaluate`](Self::evaluate) used on
    /// posterior samples: weighted `L_p` treats negative coordinates as zero.
    /// The caller guarantees `x.len() == self.dim()`.
    pub fn score(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Preference::Linear(w) => w.0.iter().zip(x).map(|(a, v)| a * v).sum(),
            Preference::Chebyshev(w) => w
                .0
                .iter()
                .zip(x)
                .map(|(a, v)| a * v)
                .fold(f64::NEG_INFINITY, f64::max),
            Preference::WeightedLp { weights, p } => {
                let s: f64 = weights.0.iter().zip(x).map(|(a, v)| a * v.max(0.0).powf(*p)).sum();
                s.powf(1.0 / p)
            }
            Preference::EpsilonConstraint(ec) => {
                if ec.feasible(x) {
                    x[ec.target]
                } else {
                    0.0
                }
            }
        }
    }

    /// Infimum of `f` over the open ball `B(center, rho)`; `rho == 0` means the center itself.
    pub fn ball_infimum(&self, center: &ObjectiveVector, rho: f64) -> Result<f64> {
        check_dim(self.dim(), center.dim())?;
        if rho == 0.0 {
            return Ok(self.score(center.as_slice()));
        }
        let low: Vec<f64> = center.as_slice().iter().map(|c| c - rho).collect();
        Ok(match self {
            Preference::EpsilonConstraint(ec) => {
                let c = center.as_slice();
                let at_target = c[ec.target] - rho;
                if ec.feasible(&low) {
                    at_target
                } else if ec.constraints().all(|(i, eps)| c[i] + rho > eps) {
                    at_target.min(0.0)
                } else {
                    0.0
                }
            }
            _ => self.score(&low),
        })
    }

    /// Supremum of `f` over the open ball `B(center, rho)`; `rho == 0` means the center itself.
    pub fn ball_supremum(&self, center: &ObjectiveVector, rho: f64) -> Result<f64> {
        check_dim(self.dim(), center.dim())?;
        if rho == 0.0 {
            return Ok(self.score(center.as_slice()));
        }
        let high: Vec<f64> = center.as_slice().iter().map(|c| c + rho).collect();
        Ok(match self {
            Preference::EpsilonConstraint(ec) => {
                let c = center.as_slice();
                let at_target = c[ec.target] + rho;
                let any_feasible = ec.constraints().all(|(i, eps)| c[i] + rho > eps);
                let all_feasible = ec.constraints().all(|(i, eps)| c[i] - rho >= eps);
                if all_feasible {
                    at_target
                } else if any_feasible {
                    at_target.max(0.0)
                } else {
                    0.0
                }
            }
            _ => self.score(&high),
        })
    }
}

/// Preference values and gaps of every action under one preference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTable {
    values: Vec<f64>,
    gaps: Vec<f64>,
    star: usize,
    optimal: Vec<usize>,
}

impl GapTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, action: usize) -> f64 {
        self.gaps[action]
    }

    /// The designated optimal action: lowest index in the optimal set.
    pub fn star(&self) -> usize {
        self.star
    }

    pub fn optimal_set(&self) -> &[usize] {
        &self.optimal
    }

    pub fn is_optimal(&self, action: usize) -> bool {
        self.optimal.contains(&action)
    }

    pub fn suboptimal(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.gaps.len()).filter(|a| !self.is_optimal(*a))
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// A table from raw gaps, for bound evaluation without an action set.
    pub fn from_gaps(gaps: Vec<f64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::invalid("gap table must not be empty"));
        }
        if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::invalid(format!("gap {g} must be finite and >= 0")));
        }
        let optimal: Vec<usize> = (0..gaps.len()).filter(|&a| gaps[a] == 0.0).collect();
        let star = *optimal
            .first()
            .ok_or_else(|| Error::invalid("at least one gap must be zero"))?;
        Ok(Self {
            values: gaps.iter().map(|g| -g).collect(),
            gaps,
            star,
            optimal,
        })
    }
}

pub fn gap_table(pref: &Preference, actions: &ActionSet) -> Result<GapTable> {
    check_dim(pref.dim(), actions.dim())?;
    let values = actions
        .means()
        .map(|m| pref.evaluate(m))
        .collect::<Result<Vec<f64>>>()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let optimal: Vec<usize> = (0..values.len()).filter(|&a| values[a] == best).collect();
    Ok(GapTable {
        gaps: values.iter().map(|v| best - v).collect(),
        star: optimal[0],
        optimal,
        values,
    })
}

/// Radii for one (optimal, suboptimal) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRadii {
    pub rho_star: f64,
    pub rho: f64,
    pub r: f64,
}

impl PairRadii {
    pub fn new(rho_star: f64, rho: f64, r: f64) -> Result<Self> {
        if !(rho_star.is_finite() && rho_star >= 0.0) {
            return Err(Error::invalid(format!("rho_star {rho_star} must be finite and >= 0")));
        }
        if !(rho.is_finite() && r.is_finite() && 0.0 < r && r < rho) {
            return Err(Error::invalid(format!("need 0 < r < rho, got r={r}, rho={rho}")));
        }
        Ok(Self { rho_star, rho, r })
    }
}

/// Per-suboptimal-action radii; optimal actions carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusAssignment {
    pairs: Vec<Option<PairRadii>>,
}

impl RadiusAssignment {
    pub fn new(pairs: Vec<Option<PairRadii>>) -> Self {
        Self { pairs }
    }

    /// The same radii for every suboptimal action of `gaps`.
    pub fn uniform(gaps: &GapTable, radii: PairRadii) -> Self {
        Self {
            pairs: (0..gaps.len())
                .map(|a| (!gaps.is_optimal(a)).then_some(radii))
                .collect(),
        }
    }

    pub fn get(&self, action: usize) -> Option<PairRadii> {
        self.pairs.get(action).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `ρ_⋆ = ρ_a = Δ_a / 2` and `r_a = Δ_a / 6` for every suboptimal action.
pub fn theorem_radii(gaps: &GapTable) -> Result<RadiusAssignment> {
    let pairs: Vec<Option<PairRadii>> = gaps
        .gaps()
        .iter()
        .map(|&d| {
            (d > 0.0).then_some(PairRadii {
                rho_star: d / 2.0,
                rho: d / 2.0,
                r: d / 6.0,
            })
        })
        .collect();
    if pairs.iter().all(Option::is_none) {
        return Err(Error::NoSuboptimalAction);
    }
    Ok(RadiusAssignment { pairs })
}

/// True iff, for every suboptimal action, the infimum of `f` over the optimal
/// action's ball strictly exceeds the supremum over the suboptimal one's.
pub fn certify_radii(pref: &Preference, actions: &ActionSet, radii: &RadiusAssignment) -> Result<bool> {
    let table = gap_table(pref, actions)?;
    if radii.len() != actions.len() {
        return Err(Error::invalid(format!(
            "radius assignment covers {} actions, expected {}",
            radii.len(),
            actions.len()
        )));
    }
    let star_mean = actions.mean(table.star());
    for a in table.suboptimal() {
        let pair = radii
            .get(a)
            .ok_or_else(|| Error::invalid(format!("no radii for suboptimal action {a}")))?;
        let low = pref.ball_infimum(star_mean, pair.rho_star)?;
        let high = pref.ball_supremum(actions.mean(a), pair.rho)?;
        // NaN radii never certify.
        if low.partial_cmp(&high) != Some(std::cmp::Ordering::Greater) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Chebyshev switching thresholds `(τ_⋆, τ_a)` for two objectives.
///
/// The active index for the optimal action is 1 when `ρ_⋆ > τ_⋆` (else 2);
/// for the suboptimal action it is 1 when `ρ_a < τ_a` (else 2).
pub fn chebyshev_thresholds(
    actions: &ActionSet,
    pref: &Preference,
    star: usize,
    a: usize,
) -> Result<(f64, f64)> {
    let Preference::Chebyshev(w) = pref else {
        return Err(Error::invalid("thresholds require a Chebyshev preference"));
    };
    if actions.dim() != 2 || w.0.len() != 2 {
        return Err(Error::invalid("Chebyshev thresholds are defined for two objectives only"));
    }
    actions.check_index(star)?;
    actions.check_index(a)?;
    let (a1, a2) = (w.0[0], w.0[1]);
    let denom = a2 - a1;
    if denom == 0.0 {
        return Err(Error::invalid("Chebyshev thresholds undefined for equal weights"));
    }
    let ms = actions.mean(star);
    let ma = actions.mean(a);
    let tau_star = (a2 * ms[1] - a1 * ms[0]) / denom;
    let tau_a = (a1 * ma[0] - a2 * ma[1]) / denom;
    Ok((tau_star, tau_a))
}

/// One-based active indices `(i_⋆, i_a)` given the thresholds and radii.
pub fn chebyshev_active_indices(tau_star: f64, tau_a: f64, rho_star: f64, rho_a: f64) -> (usize, usize) {
    let i_star = if rho_star > tau_star { 1 } else { 2 };
    let i_a = if rho_a < tau_a { 1 } else { 2 };
    (i_star, i_a)
}

/// Split of an ε-constraint radius into the part needed to satisfy the
/// constraints and the leftover that reduces the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonRadiusDecomposition {
    pub rho_under: f64,
    pub rho_over: f64,
}

impl EpsilonRadiusDecomposition {
    pub fn total(&self) -> f64 {
        self.rho_under + self.rho_over
    }
}

pub fn epsilon_decomposition(
    pref: &Preference,
    mean: &ObjectiveVector,
    rho: f64,
) -> Result<EpsilonRadiusDecomposition> {
    let Preference::EpsilonConstraint(ec) = pref else {
        return Err(Error::invalid("decomposition requires an epsilon-constraint preference"));
    };
    check_dim(ec.dim(), mean.dim())?;
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::invalid(format!("radius {rho} must be finite and >= 0")));
    }
    let shortfall = ec
        .constraints()
        .map(|(i, eps)| eps - mean[i])
        .fold(0.0_f64, f64::max);
    let rho_under = shortfall.min(rho);
    Ok(EpsilonRadiusDecomposition {
        rho_under,
        rho_over: rho - rho_under,
    })
}
