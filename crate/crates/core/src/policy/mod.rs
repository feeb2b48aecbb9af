//! Sampling policies behind a common [`Policy`] trait, looked up by name in a
//! [`PolicyRegistry`].
//!
//! Built-in entries:
//!
//! | name                     | behaviour                                              |
//! |--------------------------|--------------------------------------------------------|
//! | `mvn_ts`                 | Thompson sampling from MVN priors on vector outcomes    |
//! | `scalarized_gaussian_ts` | scalar Gaussian Thompson sampling on `f(z)`             |
//! | `fixed`                  | always plays `action` (a zero-based index)              |
//! | `oracle`                 | always plays the designated optimal action              |

mod posterior;
mod registry;
mod thompson;

pub use posterior::{ActionStats, PosteriorParams, PosteriorState, Prior, ScalarPosteriorState};
pub use registry::{PolicyContext, PolicyFactory, PolicyRegistry, PolicySpec};
pub use thompson::{argmax_set, gaussian_ts_select, mvn_ts_select, preferred_set, sample_thetas, SampledEstimate};

use crate::error::Result;
use crate::objective::ObjectiveVector;
use crate::preference::Preference;
use crate::rng::DrawSource;

/// An action-selection strategy for the episodic bandit loop.
pub trait Policy: Send {
    /// Registry name of the strategy.
    fn name(&self) -> &str;

    /// Chooses the action to play, consuming randomness only from `draws`.
    fn select(&mut self, draws: &mut dyn DrawSource) -> Result<usize>;

    /// Feeds back the outcome of the action just played.
    fn observe(&mut self, action: usize, z: &ObjectiveVector) -> Result<()>;
}

/// Thompson sampling from MVN priors.
#[derive(Debug, Clone)]
pub struct MvnThompson {
    state: PosteriorState,
    preference: Preference,
}

impl MvnThompson {
    pub fn new(n_actions: usize, preference: Preference) -> Self {
        Self {
            state: PosteriorState::new(n_actions, preference.dim()),
            preference,
        }
    }

    pub fn state(&self) -> &PosteriorState {
        &self.state
    }
}

impl Policy for MvnThompson {
    fn name(&self) -> &str {
        "mvn_ts"
    }

    fn select(&mut self, draws: &mut dyn DrawSource) -> Result<usize> {
        Ok(mvn_ts_select(&self.state, &self.preference, draws)?.0)
    }

    fn observe(&mut self, action: usize, z: &ObjectiveVector) -> Result<()> {
        self.state.update(action, z)
    }
}

/// Scalar Gaussian Thompson sampling fed with `f(z)`.
#[derive(Debug, Clone)]
pub struct ScalarizedThompson {
    state: ScalarPosteriorState,
    preference: Preference,
}

impl ScalarizedThompson {
    pub fn new(n_actions: usize, preference: Preference) -> Self {
        Self {
            state: ScalarPosteriorState::new(n_actions),
            preference,
        }
    }

    pub fn state(&self) -> &ScalarPosteriorState {
        &self.state
    }
}

impl Policy for ScalarizedThompson {
    fn name(&self) -> &str {
        "scalarized_gaussian_ts"
    }

    fn select(&mut self, draws: &mut dyn DrawSource) -> Result<usize> {
        Ok(gaussian_ts_select(&self.state, draws))
    }

    fn observe(&mut self, action: usize, z: &ObjectiveVector) -> Result<()> {
        crate::error::check_dim(self.preference.dim(), z.dim())?;
        self.state.update(action, self.preference.score(z.as_slice()))
    }
}

/// Plays the same action every episode.
#[derive(Debug, Clone)]
pub struct FixedAction {
    name: &'static str,
    action: usize,
}

impl FixedAction {
    pub fn new(action: usize) -> Self {
        Self { name: "fixed", action }
    }

    pub(crate) fn oracle(action: usize) -> Self {
        Self { name: "oracle", action }
    }
}

impl Policy for FixedAction {
    fn name(&self) -> &str {
        self.name
    }

    fn select(&mut self, _draws: &mut dyn DrawSource) -> Result<usize> {
        Ok(self.action)
    }

    fn observe(&mut self, _action: usize, _z: &ObjectiveVector) -> Result<()> {
        Ok(())
    }
}
