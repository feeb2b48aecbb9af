//! The ten-action, two-objective benchmark setting and its printed table of
//! preference values and gaps (two decimals).

use serde::Serialize;

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::objective::ActionSet;
use crate::preference::{gap_table, Preference};

pub const MEANS: [[f64; 2]; 10] = [
    [0.56, 0.46],
    [0.75, 0.26],
    [0.34, 0.79],
    [0.67, 0.50],
    [0.70, 0.42],
    [0.54, 0.72],
    [0.49, 0.62],
    [0.13, 0.84],
    [0.78, 0.60],
    [0.63, 0.44],
];

/// Printed `(f linear, f ε-constraint, Δ linear, Δ ε-constraint)` per row.
pub const PRINTED: [[f64; 4]; 10] = [
    [0.50, 0.46, 0.17, 0.26],
    [0.46, 0.26, 0.21, 0.46],
    [0.61, 0.00, 0.06, 0.72],
    [0.56, 0.50, 0.11, 0.22],
    [0.54, 0.42, 0.13, 0.29],
    [0.65, 0.72, 0.02, 0.00],
    [0.57, 0.00, 0.10, 0.72],
    [0.56, 0.00, 0.11, 0.72],
    [0.67, 0.60, 0.00, 0.12],
    [0.51, 0.44, 0.16, 0.28],
];

/// Shared outcome covariance of the MVN setting.
pub const COVARIANCE: [[f64; 2]; 2] = [[0.10, 0.05], [0.05, 0.10]];

pub const WEIGHTS: [f64; 2] = [0.4, 0.6];

pub fn actions() -> ActionSet {
    ActionSet::from_means(MEANS.iter().map(|m| m.to_vec())).expect("fixture means are valid")
}

pub fn linear() -> Preference {
    Preference::linear(WEIGHTS.to_vec()).expect("fixture weights are valid")
}

pub fn chebyshev() -> Preference {
    Preference::chebyshev(WEIGHTS.to_vec()).expect("fixture weights are valid")
}

/// `x_2` if `x_1 ≥ 0.5`, else 0.
pub fn epsilon_constraint() -> Preference {
    Preference::epsilon_constraint(2, 2, &[(1, 0.5)]).expect("fixture constraint is valid")
}

pub fn covariance() -> Vec<Vec<f64>> {
    COVARIANCE.iter().map(|r| r.to_vec()).collect()
}

pub fn mvn_environment() -> EnvironmentSpec {
    EnvironmentSpec::mvn(actions(), &covariance()).expect("fixture covariance is valid")
}

pub fn bernoulli_environment() -> EnvironmentSpec {
    EnvironmentSpec::multi_bernoulli(actions()).expect("fixture means are in [0, 1]")
}

/// Which preference column of the table to recompute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Linear,
    EpsilonConstraint,
    /// Not printed; recomputed for comparison only.
    Chebyshev,
}

impl std::str::FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Column::Linear),
            "econstraint" | "epsilon_constraint" => Ok(Column::EpsilonConstraint),
            "chebyshev" => Ok(Column::Chebyshev),
            _ => Err(Error::Unknown { kind: "preference", name: s.to_owned() }),
        }
    }
}

impl Column {
    pub fn preference(self) -> Preference {
        match self {
            Column::Linear => linear(),
            Column::EpsilonConstraint => epsilon_constraint(),
            Column::Chebyshev => chebyshev(),
        }
    }

    fn printed(self, row: usize) -> Option<(f64, f64)> {
        let p = PRINTED[row];
        match self {
            Column::Linear => Some((p[0], p[2])),
            Column::EpsilonConstraint => Some((p[1], p[3])),
            Column::Chebyshev => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub mean: [f64; 2],
    pub value: f64,
    pub gap: f64,
    pub optimal: bool,
    pub printed_value: Option<f64>,
    pub printed_gap: Option<f64>,
}

impl Row {
    /// Both recomputed numbers within `tol` of the printed ones (true when nothing is printed).
    pub fn matches(&self, tol: f64) -> bool {
        let close = |x: f64, p: Option<f64>| p.is_none_or(|p| (x - p).abs() <= tol);
        close(self.value, self.printed_value) && close(self.gap, self.printed_gap)
    }
}

/// Recomputes one preference column of the table.
pub fn recompute(column: Column) -> Vec<Row> {
    let table = gap_table(&column.preference(), &actions()).expect("fixture dimensions agree");
    (0..MEANS.len())
        .map(|a| {
            let printed = column.printed(a);
            Row {
                mean: MEANS[a],
                value: table.values()[a],
                gap: table.gap(a),
                optimal: table.is_optimal(a),
                printed_value: printed.map(|p| p.0),
                printed_gap: printed.map(|p| p.1),
            }
        })
        .collect()
}
