//! Monte-Carlo checks of the tail bounds.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{BoundQuery, Fact, Variant};
use crate::error::{Error, Result};
use crate::rng::{Domain, NoiseStream};

pub const MIN_TRIALS: u64 = 10_000;
const CHUNK: u64 = 4096;

/// Empirical event frequency next to the closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validation {
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error at the bound, `√(b(1−b)/n)`.
    pub std_error: f64,
    pub holds: bool,
}

/// Whether one simulated draw realises the event of `q`.
///
/// Chernoff draws the sample mean directly, `μ̂ − μ ~ N(0, σ²/N)` per
/// coordinate, which is its exact law for Gaussian observations.
fn event(q: &BoundQuery, rng: &mut impl Rng) -> bool {
    let (scale, threshold) = match q.fact {
        Fact::Chernoff => (q.sigma / (q.n as f64).sqrt(), q.deviation),
        _ => (q.sigma, q.deviation * q.sigma),
    };
    let mut draw = || scale * rng.sample::<f64, _>(StandardNormal);
    let strict = q.fact != Fact::Chernoff;
    match q.variant {
        Variant::Dominate => {
            let mut all = true;
            for _ in 0..q.d {
                let x = draw();
                all &= if strict { x > threshold } else { x >= threshold };
            }
            all
        }
        Variant::NotDominatedBy => {
            let mut any = false;
            for _ in 0..q.d {
                any |= draw() >= threshold;
            }
            any
        }
        Variant::BallExit => {
            let mut any = false;
            for _ in 0..q.d {
                any |= draw().abs() >= threshold;
            }
            any
        }
    }
}

/// Simulates the event of `q` `n_trials` times and compares with the bound.
///
/// Upper bounds hold when `empirical ≤ bound + 3se`, the anti-concentration
/// lower bound when `empirical ≥ bound − 3se`.
pub fn mc_validate_bound(q: &BoundQuery, n_trials: u64, stream: &NoiseStream) -> Result<Validation> {
    if n_trials < MIN_TRIALS {
        return Err(Error::invalid(format!("need at least {MIN_TRIALS} trials, got {n_trials}")));
    }
    let bound = q.bound()?;
    let chunks = n_trials.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.cell(Domain::Trial, c, 0);
            let len = CHUNK.min(n_trials - c * CHUNK);
            (0..len).filter(|_| event(q, &mut rng)).count() as u64
        })
        .sum();
    let empirical = hits as f64 / n_trials as f64;
    let std_error = (bound * (1.0 - bound) / n_trials as f64).sqrt();
    let holds = if q.fact.is_lower_bound() {
        empirical >= bound - 3.0 * std_error
    } else {
        empirical <= bound + 3.0 * std_error
    };
    Ok(Validation { empirical, bound, std_error, holds })
}

/// One block of a bounds grid: every combination of the listed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub fact: Fact,
    /// Defaults to every variant the fact defines.
    #[serde(default)]
    pub variants: Option<Vec<Variant>>,
    pub d: Vec<usize>,
    pub sigma: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: Vec<u64>,
    pub deviation: Vec<f64>,
}

fn default_n() -> Vec<u64> {
    vec![1]
}

fn default_trials() -> u64 {
    100_000
}

/// Config of the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub grid: Vec<GridBlock>,
}

impl BoundsConfig {
    /// Three values per axis for every fact and variant.
    pub fn standard() -> Self {
        let d = vec![1, 2, 3];
        Self {
            trials: default_trials(),
            seed: 20_170_101,
            grid: vec![
                GridBlock {
                    fact: Fact::Chernoff,
                    variants: None,
                    d: d.clone(),
                    sigma: vec![0.25, 0.5, 1.0],
                    n: vec![50],
                    deviation: vec![0.05, 0.1, 0.2],
                },
                GridBlock {
                    fact: Fact::Concentration,
                    variants: None,
                    d: d.clone(),
                    sigma: vec![0.25, 0.5, 1.0],
                    n: vec![1],
                    deviation: vec![1.0, 2.0, 3.0],
                },
                GridBlock {
                    fact: Fact::AntiConcentration,
                    variants: None,
                    d,
                    sigma: vec![0.25, 0.5, 1.0],
                    n: vec![1],
                    deviation: vec![1.0, 2.0, 3.0],
                },
            ],
        }
    }

    pub fn queries(&self) -> Vec<BoundQuery> {
        let mut out = Vec::new();
        for b in &self.grid {
            let variants = b.variants.clone().unwrap_or_else(|| b.fact.variants().to_vec());
            for &variant in &variants {
                for &d in &b.d {
                    for &sigma in &b.sigma {
                        for &n in &b.n {
                            for &deviation in &b.deviation {
                                out.push(BoundQuery { fact: b.fact, variant, d, sigma, n, deviation });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One output line of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub fact: Fact,
    pub variant: Variant,
    pub d: usize,
    pub sigma: f64,
    pub n: u64,
    pub deviation: f64,
    pub bound: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub holds: bool,
}

/// Validates every query of the grid; row `k` uses repetition `k` of the seed.
pub fn run_bounds_grid(config: &BoundsConfig) -> Result<Vec<BoundRow>> {
    let queries = config.queries();
    for q in &queries {
        q.validate().map_err(|e| Error::config(e.to_string()))?;
    }
    if config.trials < MIN_TRIALS {
        return Err(Error::config(format!("trials must be >= {MIN_TRIALS}")));
    }
    queries
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let v = mc_validate_bound(q, config.trials, &NoiseStream::new(config.seed, k as u64))?;
            Ok(BoundRow {
                fact: q.fact,
                variant: q.variant,
                d: q.d,
                sigma: q.sigma,
                n: q.n,
                deviation: q.deviation,
                bound: v.bound,
                empirical: v.empirical,
                std_error: v.std_error,
                holds: v.holds,
            })
        })
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn write_bounds_csv<W: std::io::Write>(rows: &[BoundRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
