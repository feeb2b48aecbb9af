//! Finite-horizon regret bounds for Thompson sampling from MVN priors.

use serde::Serialize;

use super::constant::{c_of_d, sigma_precondition};
use crate::error::{check_dim, Error, Result};
use crate::preference::{GapTable, RadiusAssignment};

/// Inputs shared by both regret bounds.
#[derive(Debug, Clone)]
pub struct RegretBoundInput<'a> {
    pub gaps: &'a GapTable,
    pub radii: &'a RadiusAssignment,
    pub sigma: f64,
    pub d: usize,
    pub horizon: u64,
}

/// A bound value together with whether its noise precondition holds.
/// When `precondition_met` is false the value is reported but not claimed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretBound {
    pub value: f64,
    pub precondition_met: bool,
}

/// `max(0, ln(d T Δ²))`.
pub fn clamped_log(d: usize, horizon: u64, gap: f64) -> f64 {
    (d as f64 * horizon as f64 * gap * gap).ln().max(0.0)
}

fn check_common(gaps: &GapTable, sigma: f64, d: usize, horizon: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    if gaps.suboptimal().next().is_none() {
        return Err(Error::NoSuboptimalAction);
    }
    Ok(())
}

/// Sum over suboptimal actions of
/// `(C+4d)(1+σ)Δ L/ρ⋆² + 4/Δ + 2Δ L/(ρ−r)² + 2σ²Δ L/r²` with `L = max(0, ln(dTΔ²))`.
pub fn prop1_bound(input: &RegretBoundInput<'_>) -> Result<RegretBound> {
    let RegretBoundInput { gaps, radii, sigma, d, horizon } = *input;
    check_common(gaps, sigma, d, horizon)?;
    check_dim(gaps.len(), radii.len())?;
    let c = c_of_d(d)?;
    let lead = (c + 4.0 * d as f64) * (1.0 + sigma);
    let mut total = 0.0;
    for a in gaps.suboptimal() {
        let delta = gaps.gap(a);
        let p = radii
            .get(a)
            .ok_or_else(|| Error::invalid(format!("no radii for suboptimal action {a}")))?;
        if p.rho_star <= 0.0 {
            return Err(Error::invalid(format!("rho_star must be > 0 for action {a}")));
        }
        let l = clamped_log(d, horizon, delta);
        let gap_r = p.rho - p.r;
        total += lead * delta * l / (p.rho_star * p.rho_star)
            + 4.0 / delta
            + 2.0 * delta * l / (gap_r * gap_r)
            + 2.0 * sigma * sigma * delta * l / (p.r * p.r);
    }
    Ok(RegretBound {
        value: total,
        precondition_met: sigma_precondition(d, sigma),
    })
}

/// Sum over suboptimal actions of `(8C + 24d + 18 + 72σ²)(1+σ)² L/Δ + 4/Δ`.
pub fn thm1_bound(gaps: &GapTable, sigma: f64, d: usize, horizon: u64) -> Result<RegretBound> {
    check_common(gaps, sigma, d, horizon)?;
    let c = c_of_d(d)?;
    let k = (8.0 * c + 24.0 * d as f64 + 18.0 + 72.0 * sigma * sigma) * (1.0 + sigma).powi(2);
    let value = gaps
        .suboptimal()
        .map(|a| {
            let delta = gaps.gap(a);
            k * clamped_log(d, horizon, delta) / delta + 4.0 / delta
        })
        .sum();
    Ok(RegretBound {
        value,
        precondition_met: sigma_precondition(d, sigma),
    })
}
