use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentConfig, ExperimentResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: String,
    pub mean_final_regret: f64,
    pub min_final_regret: f64,
    pub max_final_regret: f64,
    pub final_regret: Vec<f64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary<'a> {
    pub config: &'a ExperimentConfig,
    pub optimal_action: usize,
    pub gaps: &'a [f64],
    pub policies: Vec<PolicySummary>,
}

impl<'a> Summary<'a> {
    pub fn new(result: &'a ExperimentResult) -> Self {
        let policies = result
            .curves
            .iter()
            .map(|c| {
                let finals = c.finals();
                PolicySummary {
                    policy: c.label.clone(),
                    mean_final_regret: c.final_mean(),
                    min_final_regret: finals.iter().copied().fold(f64::INFINITY, f64::min),
                    max_final_regret: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    final_regret: finals,
                }
            })
            .collect();
        Self {
            config: &result.config,
            optimal_action: result.gaps.star(),
            gaps: result.gaps.gaps(),
            policies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub regret_csv: PathBuf,
    pub mean_curve_csv: PathBuf,
    pub summary_json: PathBuf,
}

#[derive(Serialize)]
struct RegretLine<'a> {
    policy: &'a str,
    repetition: u64,
    episode: u64,
    action: usize,
    gap: f64,
    cum_regret: f64,
}

#[derive(Serialize)]
struct CurveLine<'a> {
    policy: &'a str,
    episode: usize,
    mean: f64,
    min: f64,
    max: f64,
}

/// `policy,repetition,episode,action,gap,cum_regret`, one line per episode.
pub fn write_regret_csv<W: std::io::Write>(result: &ExperimentResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for run in &result.runs {
        let mut cum = 0.0;
        for row in &run.rows {
            cum += row.gap;
            w.serialize(RegretLine {
                policy: &run.label,
                repetition: run.repetition,
                episode: row.episode,
                action: row.action,
                gap: row.gap,
                cum_regret: cum,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `policy,episode,mean,min,max` over repetitions.
pub fn write_mean_curve_csv<W: std::io::Write>(result: &ExperimentResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &result.curves {
        for t in 0..c.horizon() {
            w.serialize(CurveLine {
                policy: &c.label,
                episode: t + 1,
                mean: c.mean[t],
                min: c.min[t],
                max: c.max[t],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_owned(),
        source: e.into(),
    }
}

/// Writes `regret.csv`, `mean_curve.csv` and `summary.json` under `dir`.
pub fn export(result: &ExperimentResult, dir: &Path) -> Result<ExportPaths> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let paths = ExportPaths {
        regret_csv: dir.join("regret.csv"),
        mean_curve_csv: dir.join("mean_curve.csv"),
        summary_json: dir.join("summary.json"),
    };
    let file = fs::File::create(&paths.regret_csv).map_err(io_err(&paths.regret_csv))?;
    write_regret_csv(result, std::io::BufWriter::new(file)).map_err(csv_err(&paths.regret_csv))?;
    let file = fs::File::create(&paths.mean_curve_csv).map_err(io_err(&paths.mean_curve_csv))?;
    write_mean_curve_csv(result, std::io::BufWriter::new(file)).map_err(csv_err(&paths.mean_curve_csv))?;
    let mut text = serde_json::to_string_pretty(&Summary::new(result)).expect("summary serializes");
    text.push('\n');
    fs::write(&paths.summary_json, text).map_err(io_err(&paths.summary_json))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_experiment;
    use crate::policy::{PolicyRegistry, PolicySpec};

    #[test]
    fn row_counts_and_replay() {
        let cfg = ExperimentConfig {
            environment: crate::table1::bernoulli_environment(),
            preference: crate::table1::epsilon_constraint(),
            policies: vec![PolicySpec::named("mvn_ts"), PolicySpec::named("scalarized_gaussian_ts")],
            horizon: 10,
            repetitions: 2,
            seed: 5,
            output_dir: None,
        };
        let reg = PolicyRegistry::with_defaults();
        let dir = tempfile::tempdir().unwrap();
        let p1 = export(&run_experiment(&cfg, &reg).unwrap(), &dir.path().join("a")).unwrap();
        let p2 = export(&run_experiment(&cfg, &reg).unwrap(), &dir.path().join("b")).unwrap();
        let a = fs::read_to_string(&p1.regret_csv).unwrap();
        assert_eq!(a, fs::read_to_string(&p2.regret_csv).unwrap());
        assert_eq!(
            fs::read(&p1.summary_json).unwrap(),
            fs::read(&p2.summary_json).unwrap()
        );
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), "policy,repetition,episode,action,gap,cum_regret");
        assert_eq!(lines.count(), 40);
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p1.summary_json).unwrap()).unwrap();
        assert_eq!(summary["optimal_action"], 5);
        assert_eq!(summary["policies"].as_array().unwrap().len(), 2);
        assert_eq!(summary["config"]["horizon"], 10);
    }
}
