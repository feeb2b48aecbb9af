//! One elicitation session as a deterministic state machine.
//!
//! Episode `t` samples `θ_a(t)` from the `(seed, repetition)` stream exactly
//! as the simulation harness does, so presentations can be recomputed from
//! the posterior alone and a scripted oracle reproduces a harness run.

use mobandit_core::environment::EnvironmentSpec;
use mobandit_core::objective::{non_dominated, ObjectiveVector};
use mobandit_core::policy::{preferred_set, sample_thetas, PosteriorState};
use mobandit_core::preference::{gap_table, GapTable};
use mobandit_core::rng::{DrawSource, EpisodeDraws, NoiseStream};
use mobandit_core::Preference;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// Who picks the preferred option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Human,
    /// Picks `argmax f(θ)` with uniform tie-breaking.
    ScriptedOracle { preference: Preference },
}

/// Body of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub env: EnvironmentSpec,
    pub mode: Mode,
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub repetition: u64,
    /// Used for regret reporting; defaults to the oracle's preference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_preference: Option<Preference>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionItem {
    pub index: usize,
    pub action: String,
    pub theta: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Presentation {
    pub episode: u64,
    pub options: Vec<OptionItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub episode: u64,
    /// `θ_a(t)` for every action, in action order.
    pub options: Vec<ObjectiveVector>,
    pub chosen: usize,
    pub observation: ObjectiveVector,
    /// Posterior means of every action after the update.
    pub posterior_means: Vec<ObjectiveVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cum_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceResult {
    pub episode: u64,
    pub action: usize,
    pub observation: ObjectiveVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cum_regret: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub episodes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cum_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct History {
    pub id: String,
    pub status: Status,
    pub episode: u64,
    pub horizon: u64,
    pub entries: Vec<HistoryEntry>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    config: SessionConfig,
    stream: NoiseStream,
    posterior: PosteriorState,
    gaps: Option<GapTable>,
    pending: Option<Vec<ObjectiveVector>>,
    history: Vec<HistoryEntry>,
    cum_regret: f64,
}

impl Session {
    pub fn new(id: String, config: SessionConfig) -> Result<Self, ServiceError> {
        if config.horizon == 0 {
            return Err(ServiceError::BadRequest("horizon must be >= 1".into()));
        }
        let dim = config.env.dim();
        let oracle = match &config.mode {
            Mode::ScriptedOracle { preference } => Some(preference),
            Mode::Human => None,
        };
        for p in [config.reference_preference.as_ref(), oracle].into_iter().flatten() {
            if p.dim() != dim {
                return Err(ServiceError::BadRequest(format!(
                    "preference has dimension {}, environment has {dim}",
                    p.dim()
                )));
            }
        }
        let reference = config.reference_preference.as_ref().or(oracle);
        let gaps = reference.map(|p| gap_table(p, config.env.actions())).transpose()?;
        Ok(Self {
            id,
            stream: NoiseStream::new(config.seed, config.repetition),
            posterior: PosteriorState::new(config.env.actions().len(), dim),
            gaps,
            pending: None,
            history: Vec::new(),
            cum_regret: 0.0,
            config,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn posterior(&self) -> &PosteriorState {
        &self.posterior
    }

    /// Number of completed episodes.
    pub fn episode(&self) -> u64 {
        self.history.len() as u64
    }

    pub fn status(&self) -> Status {
        if self.episode() >= self.config.horizon {
            Status::Finished
        } else {
            Status::Active
        }
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.history
    }

    fn draws(&self) -> EpisodeDraws {
        EpisodeDraws::new(self.stream, self.episode() + 1)
    }

    fn ensure_active(&self) -> Result<(), ServiceError> {
        match self.status() {
            Status::Active => Ok(()),
            Status::Finished => Err(ServiceError::Conflict(format!(
                "session finished after {} episodes",
                self.config.horizon
            ))),
        }
    }

    /// Samples (or returns the stored) estimates for the next episode.
    pub fn next_options(&mut self, front_only: bool) -> Result<Presentation, ServiceError> {
        self.ensure_active()?;
        if self.pending.is_none() {
            let mut draws = self.draws();
            self.pending = Some(sample_thetas(&self.posterior, &mut draws));
        }
        let thetas = self.pending.as_ref().expect("just sampled");
        let keep = if front_only {
            non_dominated(thetas)?
        } else {
            (0..thetas.len()).collect()
        };
        let actions = self.config.env.actions().actions();
        Ok(Presentation {
            episode: self.episode() + 1,
            options: keep
                .into_iter()
                .map(|i| OptionItem {
                    index: i,
                    action: actions[i].name.clone(),
                    theta: thetas[i].clone(),
                })
                .collect(),
        })
    }

    /// Plays `index` for the pending presentation.
    pub fn submit_choice(&mut self, index: usize) -> Result<ChoiceResult, ServiceError> {
        self.ensure_active()?;
        let Some(thetas) = self.pending.as_ref() else {
            return Err(ServiceError::Conflict("no pending presentation; request options first".into()));
        };
        if index >= thetas.len() {
            return Err(ServiceError::BadRequest(format!(
                "choice {index} out of range for {} actions",
                thetas.len()
            )));
        }
        let t = self.episode() + 1;
        let obs = self.config.env.sample_outcome(index, &self.stream, t)?;
        self.posterior.update(index, &obs.values)?;
        let gap = self.gaps.as_ref().map(|g| g.gap(index));
        if let Some(g) = gap {
            self.cum_regret += g;
        }
        let cum_regret = gap.map(|_| self.cum_regret);
        let posterior_means = (0..self.posterior.n_actions())
            .map(|a| self.posterior.posterior_params(a).map(|p| p.mean))
            .collect::<Result<Vec<_>, _>>()?;
        let options = self.pending.take().expect("checked above");
        self.history.push(HistoryEntry {
            episode: t,
            options,
            chosen: index,
            observation: obs.values.clone(),
            posterior_means,
            gap,
            cum_regret,
        });
        Ok(self.result_of(self.history.len() - 1))
    }

    /// The response for an already completed episode (for repeated submissions).
    pub fn result_of(&self, entry: usize) -> ChoiceResult {
        let e = &self.history[entry];
        let status = if entry + 1 == self.history.len() { self.status() } else { Status::Active };
        ChoiceResult {
            episode: e.episode,
            action: e.chosen,
            observation: e.observation.clone(),
            cum_regret: e.cum_regret,
            status,
            summary: (status == Status::Finished).then(|| Summary {
                episodes: self.episode(),
                cum_regret: e.cum_regret,
            }),
        }
    }

    /// The scripted oracle's pick for the next episode.
    pub fn oracle_choice(&mut self) -> Result<usize, ServiceError> {
        let Mode::ScriptedOracle { preference } = &self.config.mode else {
            return Err(ServiceError::Conflict("session is driven by a human".into()));
        };
        let preference = preference.clone();
        self.next_options(false)?;
        let thetas = self.pending.as_ref().expect("presented");
        let (_, preferred) = preferred_set(&preference, thetas)?;
        let mut draws = self.draws();
        Ok(preferred[draws.tie_break(preferred.len())])
    }

    pub fn history(&self) -> History {
        History {
            id: self.id.clone(),
            status: self.status(),
            episode: self.episode(),
            horizon: self.config.horizon,
            entries: self.history.clone(),
        }
    }
}
