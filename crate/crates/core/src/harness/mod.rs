//! The episodic game loop, paired-repetition experiments and their export.
//!
//! Every policy of an experiment runs repetition `r` on `NoiseStream(seed, r)`,
//! so all policies see the same outcome primitives at each episode.

mod config;
mod curve;
mod export;
mod pareto;

pub use config::ExperimentConfig;
pub use curve::RegretCurve;
pub use export::{export, write_mean_curve_csv, write_regret_csv, ExportPaths, PolicySummary, Summary};
pub use pareto::pareto_regret;

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::EnvironmentSpec;
use crate::error::Result;
use crate::objective::ObjectiveVector;
use crate::policy::{Policy, PolicyContext, PolicyRegistry};
use crate::preference::{gap_table, GapTable};
use crate::rng::{EpisodeDraws, NoiseStream};

/// One played episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub action: usize,
    pub observation: ObjectiveVector,
    pub gap: f64,
}

/// Trajectory of one policy on one repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub label: String,
    pub repetition: u64,
    pub rows: Vec<EpisodeRow>,
}

impl RunRecord {
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }

    pub fn actions(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.action).collect()
    }

    /// Fraction of the last `window` episodes in which `action` was played.
    pub fn play_frequency(&self, action: usize, window: usize) -> f64 {
        let w = window.min(self.rows.len());
        if w == 0 {
            return 0.0;
        }
        let tail = &self.rows[self.rows.len() - w..];
        tail.iter().filter(|r| r.action == action).count() as f64 / w as f64
    }
}

/// Plays episode `t`: select, observe the paired outcome, update.
pub fn run_episode(
    policy: &mut dyn Policy,
    env: &EnvironmentSpec,
    gaps: &GapTable,
    stream: &NoiseStream,
    t: u64,
) -> Result<EpisodeRow> {
    let mut draws = EpisodeDraws::new(*stream, t);
    let action = policy.select(&mut draws)?;
    let obs = env.sample_outcome(action, stream, t)?;
    policy.observe(action, &obs.values)?;
    Ok(EpisodeRow {
        episode: t,
        action,
        observation: obs.values,
        gap: gaps.gap(action),
    })
}

/// Runs `horizon` episodes from a fresh policy.
pub fn run_trajectory(
    policy: &mut dyn Policy,
    env: &EnvironmentSpec,
    gaps: &GapTable,
    stream: &NoiseStream,
    horizon: u64,
) -> Result<Vec<EpisodeRow>> {
    (1..=horizon).map(|t| run_episode(policy, env, gaps, stream, t)).collect()
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub gaps: GapTable,
    /// Policy-major, repetition-minor, in config order.
    pub runs: Vec<RunRecord>,
    pub curves: Vec<RegretCurve>,
}

impl ExperimentResult {
    pub fn curve(&self, label: &str) -> Option<&RegretCurve> {
        self.curves.iter().find(|c| c.label == label)
    }

    pub fn runs_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }
}

/// Runs every (policy, repetition) pair in parallel; the result does not
/// depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig, registry: &PolicyRegistry) -> Result<ExperimentResult> {
    config.validate(registry)?;
    let env = &config.environment;
    let gaps = gap_table(&config.preference, env.actions())?;
    let labels = config.labels();
    let ctx = PolicyContext {
        actions: env.actions(),
        preference: &config.preference,
    };
    let jobs: Vec<(usize, u64)> = (0..config.policies.len())
        .flat_map(|p| (0..config.repetitions).map(move |r| (p, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(p, r)| {
            let mut policy = registry.build(&config.policies[p], &ctx)?;
            let stream = NoiseStream::new(config.seed, r);
            let rows = run_trajectory(policy.as_mut(), env, &gaps, &stream, config.horizon)?;
            Ok(RunRecord {
                label: labels[p].clone(),
                repetition: r,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curves = labels
        .iter()
        .map(|label| {
            let gap_runs: Vec<Vec<f64>> = runs.iter().filter(|r| &r.label == label).map(RunRecord::gaps).collect();
            RegretCurve::from_gaps(label.clone(), gap_runs.iter().map(Vec::as_slice))
        })
        .collect();
    Ok(ExperimentResult {
        config: config.clone(),
        gaps,
        runs,
        curves,
    })
}
