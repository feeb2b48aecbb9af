//! Objective-space geometry: vectors, Pareto dominance, open balls and the
//! action set shared by every other module.
//!
//! Dominance follows the usual maximisation convention. `x` dominates `y`
//! when `x_i >= y_i` for every coordinate and `x_i > y_i` for at least one;
//! the dominance is strict when `x_i > y_i` for every coordinate.

use std::collections::HashSet;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point in objective space (a mean, an observation or a posterior sample).
///
/// Coordinates must be finite but are not restricted to `[0, 1]`: noisy
/// observations and posterior samples routinely leave the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("objective vector must have at least one coordinate"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self + s` applied to every coordinate.
    pub fn offset(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v + s).collect())
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        Self(values)
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ObjectiveVector> for Vec<f64> {
    fn from(v: ObjectiveVector) -> Self {
        v.0
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Outcome of comparing `x` against `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    StrictlyDominates,
    Dominates,
    DominatedBy,
    StrictlyDominatedBy,
    Incomparable,
    Equal,
}

impl Dominance {
    /// The relation seen from the other side: `compare(y, x)`.
    pub fn mirror(self) -> Self {
        match self {
            Dominance::StrictlyDominates => Dominance::StrictlyDominatedBy,
            Dominance::Dominates => Dominance::DominatedBy,
            Dominance::DominatedBy => Dominance::Dominates,
            Dominance::StrictlyDominatedBy => Dominance::StrictlyDominates,
            Dominance::Incomparable => Dominance::Incomparable,
            Dominance::Equal => Dominance::Equal,
        }
    }

    /// `x ⪰ y` (weak Pareto dominance, strict included).
    pub fn dominates(self) -> bool {
        matches!(self, Dominance::Dominates | Dominance::StrictlyDominates)
    }

    /// `y ⪰ x`.
    pub fn is_dominated(self) -> bool {
        self.mirror().dominates()
    }
}

pub fn compare(x: &ObjectiveVector, y: &ObjectiveVector) -> Result<Dominance> {
    check_dim(x.dim(), y.dim())?;
    Ok(compare_slices(x.as_slice(), y.as_slice()))
}

pub(crate) fn compare_slices(x: &[f64], y: &[f64]) -> Dominance {
    let d = x.len();
    let mut greater = 0;
    let mut less = 0;
    for (a, b) in x.iter().zip(y) {
        if a > b {
            greater += 1;
        } else if a < b {
            less += 1;
        }
    }
    match (greater, less) {
        (0, 0) => Dominance::Equal,
        (g, 0) if g == d => Dominance::StrictlyDominates,
        (_, 0) => Dominance::Dominates,
        (0, l) if l == d => Dominance::StrictlyDominatedBy,
        (0, _) => Dominance::DominatedBy,
        _ => Dominance::Incomparable,
    }
}

/// Indices of the points not dominated by any other point. Duplicates are all kept.
pub fn non_dominated(points: &[ObjectiveVector]) -> Result<Vec<usize>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    for p in points {
        check_dim(first.dim(), p.dim())?;
    }
    Ok((0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && compare_slices(other.as_slice(), points[i].as_slice()).dominates())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    pub mean: ObjectiveVector,
}

/// A finite, nonempty set of named actions sharing one objective dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ActionSetConfig", into = "ActionSetConfig")]
pub struct ActionSet {
    dim: usize,
    actions: Vec<Action>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ActionSetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    actions: Vec<Action>,
}

impl ActionSet {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        let first = actions
            .first()
            .ok_or_else(|| Error::invalid("action set must contain at least one action"))?;
        let dim = first.mean.dim();
        let mut names = HashSet::new();
        for a in &actions {
            check_dim(dim, a.mean.dim())?;
            if !names.insert(a.name.as_str()) {
                return Err(Error::invalid(format!("duplicate action name `{}`", a.name)));
            }
        }
        Ok(Self { dim, actions })
    }

    /// Builds a set named `a0, a1, ...` from raw means.
    pub fn from_means<I, V>(means: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<Vec<f64>>,
    {
        let actions = means
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                Ok(Action {
                    name: format!("a{i}"),
                    mean: ObjectiveVector::new(m.into())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(actions)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn mean(&self, index: usize) -> &ObjectiveVector {
        &self.actions[index].mean
    }

    pub fn means(&self) -> impl Iterator<Item = &ObjectiveVector> + '_ {
        self.actions.iter().map(|a| &a.mean)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "action index {index} out of range (0..{})",
                self.len()
            )))
        }
    }
}

impl TryFrom<ActionSetConfig> for ActionSet {
    type Error = Error;

    fn try_from(cfg: ActionSetConfig) -> Result<Self> {
        let set = ActionSet::new(cfg.actions)?;
        if let Some(d) = cfg.dimension {
            check_dim(d, set.dim)?;
        }
        Ok(set)
    }
}

impl From<ActionSet> for ActionSetConfig {
    fn from(set: ActionSet) -> Self {
        Self {
            dimension: Some(set.dim),
            actions: set.actions,
        }
    }
}

/// Indices of the Pareto-optimal actions.
pub fn pareto_front(actions: &ActionSet) -> Vec<usize> {
    let means: Vec<ObjectiveVector> = actions.means().cloned().collect();
    non_dominated(&means).expect("action set means share one dimension")
}

/// Open hypercube `{x : |x_i - c_i| < r for all i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: ObjectiveVector,
    radius: f64,
}

impl Ball {
    pub fn new(center: ObjectiveVector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::invalid(format!("ball radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &ObjectiveVector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Open-box test, written against the endpoints `c ± r` so that points
    /// sitting exactly on a representable boundary are excluded.
    pub fn contains(&self, x: &ObjectiveVector) -> Result<bool> {
        check_dim(self.center.dim(), x.dim())?;
        Ok(x
            .as_slice()
            .iter()
            .zip(self.center.as_slice())
            .all(|(&xi, &ci)| ci - self.radius < xi && xi < ci + self.radius))
    }
}
