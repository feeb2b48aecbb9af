//! Theoretical quantities: tail bounds, the constant `C(d)`, regret bounds,
//! and Monte-Carlo checks of the tail bounds.

mod bounds;
mod constant;
mod regret;
mod validate;

pub use bounds::{anti_concentration_bound, chernoff_bound, gaussian_concentration_bound, BoundQuery, Fact, Variant};
pub use constant::{
    c_margin, c_of_d, c_of_d_ln, c_of_d_minimal_ln, lemma1_bound, sigma_precondition, verify_c_of_d, CVerification,
};
pub use regret::{clamped_log, prop1_bound, thm1_bound, RegretBound, RegretBoundInput};
pub use validate::{
    mc_validate_bound, run_bounds_grid, write_bounds_csv, BoundRow, BoundsConfig, GridBlock, Validation, MIN_TRIALS,
};
