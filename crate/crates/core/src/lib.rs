//! Multi-objective stochastic bandits with scalarized preferences.

pub mod analysis;
pub mod environment;
pub mod error;
pub mod harness;
pub mod objective;
pub mod policy;
pub mod preference;
pub mod rng;
pub mod table1;

pub use error::{Error, Result};
pub use objective::{ActionSet, ObjectiveVector};
pub use preference::Preference;
