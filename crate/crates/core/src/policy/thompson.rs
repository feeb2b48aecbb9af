//! Thompson sampling from multivariate-normal priors and its scalar
//! counterpart run on scalarized rewards.

use serde::Serialize;

use super::posterior::{PosteriorState, ScalarPosteriorState};
use crate::error::{check_dim, Result};
use crate::objective::ObjectiveVector;
use crate::preference::Preference;
use crate::rng::DrawSource;

/// The posterior samples of one decision and the actions they prefer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledEstimate {
    pub thetas: Vec<ObjectiveVector>,
    pub values: Vec<f64>,
    /// `argmax_a f(θ_a)`, never empty.
    pub preferred: Vec<usize>,
}

/// One draw `θ_a ~ N(N_a μ̂_a / (N_a + 1), I / (N_a + 1))` per action.
pub fn sample_thetas(state: &PosteriorState, draws: &mut dyn DrawSource) -> Vec<ObjectiveVector> {
    let mut eta = vec![0.0; state.dim()];
    (0..state.n_actions())
        .map(|a| {
            draws.normals(a, &mut eta);
            let scale = state.precision(a).sqrt().recip();
            let theta = state
                .posterior_mean(a)
                .iter()
                .zip(&eta)
                .map(|(m, e)| m + scale * e)
                .collect();
            ObjectiveVector::from_vec_unchecked(theta)
        })
        .collect()
}

/// Indices attaining the maximum (exact ties only).
pub fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&i| values[i] == best).collect()
}

/// Scores `thetas` and returns `(values, preferred set)`.
pub fn preferred_set(pref: &Preference, thetas: &[ObjectiveVector]) -> Result<(Vec<f64>, Vec<usize>)> {
    for t in thetas {
        check_dim(pref.dim(), t.dim())?;
    }
    let values: Vec<f64> = thetas.iter().map(|t| pref.score(t.as_slice())).collect();
    let preferred = argmax_set(&values);
    Ok((values, preferred))
}

/// Samples every posterior, then plays a uniformly random member of the preferred set.
pub fn mvn_ts_select(
    state: &PosteriorState,
    pref: &Preference,
    draws: &mut dyn DrawSource,
) -> Result<(usize, SampledEstimate)> {
    check_dim(state.dim(), pref.dim())?;
    let thetas = sample_thetas(state, draws);
    let (values, preferred) = preferred_set(pref, &thetas)?;
    let chosen = preferred[draws.tie_break(preferred.len())];
    Ok((
        chosen,
        SampledEstimate {
            thetas,
            values,
            preferred,
        },
    ))
}

/// Scalar Gaussian Thompson sampling on rewards `f(z)`.
///
/// Consumes the first normal of each action's draw cell, so at `d = 1` it
/// sees exactly the primitives [`mvn_ts_select`] would.
pub fn gaussian_ts_select(state: &ScalarPosteriorState, draws: &mut dyn DrawSource) -> usize {
    let mut eta = [0.0];
    let values: Vec<f64> = (0..state.n_actions())
        .map(|a| {
            draws.normals(a, &mut eta);
            let (mean, var) = state.params(a);
            mean + var.sqrt() * eta[0]
        })
        .collect();
    let best = argmax_set(&values);
    best[draws.tie_break(best.len())]
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::rng::RngDraws;

    fn v(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn converged_posteriors_pick_true_argmax() {
        let pref = Preference::linear(vec![0.4, 0.6]).unwrap();
        let mut s = PosteriorState::new(3, 2);
        let means = [[0.2, 0.3], [0.78, 0.6], [0.54, 0.72]];
        for (a, m) in means.iter().enumerate() {
            for _ in 0..1_000_000 {
                s.update(a, &v(m)).unwrap();
            }
        }
        let mut draws = RngDraws(ChaCha8Rng::seed_from_u64(3));
        for _ in 0..200 {
            assert_eq!(mvn_ts_select(&s, &pref, &mut draws).unwrap().0, 1);
        }
    }

    #[test]
    fn identical_actions_split_evenly() {
        let pref = Preference::chebyshev(vec![0.3, 0.7]).unwrap();
        let mut s = PosteriorState::new(2, 2);
        for a in 0..2 {
            for _ in 0..5 {
                s.update(a, &v(&[0.5, 0.5])).unwrap();
            }
        }
        let mut draws = RngDraws(ChaCha8Rng::seed_from_u64(11));
        let n = 10_000;
        let first = (0..n)
            .filter(|_| mvn_ts_select(&s, &pref, &mut draws).unwrap().0 == 0)
            .count();
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn fresh_state_is_uniform() {
        let pref = Preference::linear(vec![0.4, 0.6]).unwrap();
        let s = PosteriorState::new(4, 2);
        let mut draws = RngDraws(ChaCha8Rng::seed_from_u64(5));
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[mvn_ts_select(&s, &pref, &mut draws).unwrap().0] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn estimate_record_is_consistent() {
        let pref = Preference::epsilon_constraint(2, 2, &[(1, 0.5)]).unwrap();
        let s = PosteriorState::new(5, 2);
        let mut draws = RngDraws(ChaCha8Rng::seed_from_u64(1));
        let (a, est) = mvn_ts_select(&s, &pref, &mut draws).unwrap();
        assert!(est.preferred.contains(&a));
        assert_eq!(est.thetas.len(), 5);
        let best = est.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &i in &est.preferred {
            assert_eq!(est.values[i], best);
        }
        let wrong = Preference::linear(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(mvn_ts_select(&s, &wrong, &mut draws).is_err());
    }

    #[test]
    fn scalar_ts_examples() {
        let fresh = ScalarPosteriorState::new(5);
        let mut draws = RngDraws(ChaCha8Rng::seed_from_u64(2));
        let n = 10_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[gaussian_ts_select(&fresh, &mut draws)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.2).abs() < 0.02, "{counts:?}");
        }

        let mut s = ScalarPosteriorState::new(3);
        for a in 0..3 {
            let reward = if a == 0 { 1.0 } else { 0.0 };
            for _ in 0..1_000_000 {
                s.update(a, reward).unwrap();
            }
        }
        let wins = (0..n).filter(|_| gaussian_ts_select(&s, &mut draws) == 0).count();
        assert!(wins as f64 / n as f64 >= 0.999);
    }
}
