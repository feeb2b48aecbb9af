use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::policy::{PolicyContext, PolicyRegistry, PolicySpec};
use crate::preference::Preference;

fn default_repetitions() -> u64 {
    20
}

/// A full experiment: environment, preference, policies and repetition plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub preference: Preference,
    pub policies: Vec<PolicySpec>,
    pub horizon: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u64,
    #[serde(default)]
    pub seed: u64,
    /// Where `run` writes its files when no directory is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })
    }

    /// Output labels in config order.
    pub fn labels(&self) -> Vec<String> {
        self.policies.iter().map(PolicySpec::label).collect()
    }

    /// Checks the plan and that every policy can be built.
    pub fn validate(&self, registry: &PolicyRegistry) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be >= 1"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("at least one policy is required"));
        }
        if self.preference.dim() != self.environment.dim() {
            return Err(Error::config(format!(
                "preference has dimension {}, environment has {}",
                self.preference.dim(),
                self.environment.dim()
            )));
        }
        let mut seen = BTreeSet::new();
        for label in self.labels() {
            if !seen.insert(label.clone()) {
                return Err(Error::config(format!("duplicate policy label `{label}`")));
            }
        }
        let ctx = PolicyContext {
            actions: self.environment.actions(),
            preference: &self.preference,
        };
        for spec in &self.policies {
            registry.build(spec, &ctx).map_err(|e| Error::config(e.to_string()))?;
        }
        Ok(())
    }
}
