use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::objective::ObjectiveVector;

/// Sufficient statistics of one action's observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub count: u64,
    pub sum: Vec<f64>,
    /// Row-major `d × d` sum of `z zᵀ`.
    pub outer: Vec<f64>,
}

impl ActionStats {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; dim],
            outer: vec![0.0; dim * dim],
        }
    }
}

/// Per-action observation statistics for vector-valued outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    dim: usize,
    stats: Vec<ActionStats>,
}

/// Mean and covariance of a multivariate normal posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorParams {
    pub mean: ObjectiveVector,
    pub covariance: DMatrix<f64>,
}

/// Prior mean/covariance and a known noise covariance.
///
/// [`Prior::default_for`] is the non-informative case used by the sampler:
/// zero mean, identity prior covariance, identity noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub noise_covariance: DMatrix<f64>,
}

impl Prior {
    pub fn default_for(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            covariance: DMatrix::identity(dim, dim),
            noise_covariance: DMatrix::identity(dim, dim),
        }
    }
}

impl PosteriorState {
    pub fn new(n_actions: usize, dim: usize) -> Self {
        assert!(n_actions >= 1 && dim >= 1, "need at least one action and one objective");
        Self {
            dim,
            stats: (0..n_actions).map(|_| ActionStats::new(dim)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_actions(&self) -> usize {
        self.stats.len()
    }

    pub fn stats(&self, action: usize) -> &ActionStats {
        &self.stats[action]
    }

    pub fn count(&self, action: usize) -> u64 {
        self.stats[action].count
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action < self.stats.len() {
            Ok(())
        } else {
            Err(Error::invalid(format!("action index {action} out of range")))
        }
    }

    pub fn update(&mut self, action: usize, z: &ObjectiveVector) -> Result<()> {
        self.check_action(action)?;
        check_dim(self.dim, z.dim())?;
        let d = self.dim;
        let s = &mut self.stats[action];
        s.count += 1;
        let z = z.as_slice();
        for i in 0..d {
            s.sum[i] += z[i];
            for j in 0..d {
                s.outer[i * d + j] += z[i] * z[j];
            }
        }
        Ok(())
    }

    /// `μ̂_a`, undefined before the first observation.
    pub fn empirical_mean(&self, action: usize) -> Option<ObjectiveVector> {
        let s = &self.stats[action];
        (s.count > 0).then(|| {
            let n = s.count as f64;
            ObjectiveVector::from_vec_unchecked(s.sum.iter().map(|v| v / n).collect())
        })
    }

    /// Unbiased sample covariance (denominator `N_a - 1`).
    pub fn empirical_covariance(&self, action: usize) -> Result<DMatrix<f64>> {
        self.check_action(action)?;
        let s = &self.stats[action];
        if s.count < 2 {
            return Err(Error::InsufficientSamples { needed: 2, have: s.count });
        }
        let d = self.dim;
        let n = s.count as f64;
        let mean: Vec<f64> = s.sum.iter().map(|v| v / n).collect();
        Ok(DMatrix::from_fn(d, d, |i, j| {
            (s.outer[i * d + j] - n * mean[i] * mean[j]) / (n - 1.0)
        }))
    }

    /// Posterior under the non-informative prior: mean `N_a μ̂_a / (N_a + 1)`,
    /// covariance `I / (N_a + 1)`.
    pub fn posterior_params(&self, action: usize) -> Result<PosteriorParams> {
        self.check_action(action)?;
        let d = self.dim;
        Ok(PosteriorParams {
            mean: ObjectiveVector::from_vec_unchecked(self.posterior_mean(action)),
            covariance: DMatrix::identity(d, d) / self.precision(action),
        })
    }

    /// Conjugate posterior for an arbitrary prior and known noise covariance.
    pub fn posterior_params_with(&self, action: usize, prior: &Prior) -> Result<PosteriorParams> {
        self.check_action(action)?;
        let d = self.dim;
        check_dim(d, prior.mean.len())?;
        check_dim(d, prior.covariance.nrows())?;
        check_dim(d, prior.noise_covariance.nrows())?;
        let prior_prec = prior
            .covariance
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("prior covariance is singular"))?;
        let noise_prec = prior
            .noise_covariance
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("noise covariance is singular"))?;
        let s = &self.stats[action];
        let n = s.count as f64;
        let covariance = (&prior_prec + &noise_prec * n)
            .try_inverse()
            .ok_or_else(|| Error::invalid("posterior precision is singular"))?;
        // N Σ⁻¹ μ̂ = Σ⁻¹ Σ z
        let sum = DVector::from_column_slice(&s.sum);
        let mean = &covariance * (&prior_prec * &prior.mean + &noise_prec * sum);
        Ok(PosteriorParams {
            mean: ObjectiveVector::new(mean.iter().copied().collect())?,
            covariance,
        })
    }

    pub(crate) fn precision(&self, action: usize) -> f64 {
        self.stats[action].count as f64 + 1.0
    }

    pub(crate) fn posterior_mean(&self, action: usize) -> Vec<f64> {
        let s = &self.stats[action];
        let denom = s.count as f64 + 1.0;
        s.sum.iter().map(|v| v / denom).collect()
    }
}

/// Per-action statistics of scalar rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPosteriorState {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl ScalarPosteriorState {
    pub fn new(n_actions: usize) -> Self {
        assert!(n_actions >= 1, "need at least one action");
        Self {
            counts: vec![0; n_actions],
            sums: vec![0.0; n_actions],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, action: usize) -> u64 {
        self.counts[action]
    }

    pub fn update(&mut self, action: usize, reward: f64) -> Result<()> {
        if action >= self.counts.len() {
            return Err(Error::invalid(format!("action index {action} out of range")));
        }
        if !reward.is_finite() {
            return Err(Error::invalid(format!("reward {reward} is not finite")));
        }
        self.counts[action] += 1;
        self.sums[action] += reward;
        Ok(())
    }

    /// `(N μ̂ / (N + 1), 1 / (N + 1))`.
    pub fn params(&self, action: usize) -> (f64, f64) {
        let denom = self.counts[action] as f64 + 1.0;
        (self.sums[action] / denom, 1.0 / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn posterior_examples() {
        let mut s = PosteriorState::new(2, 2);
        let p = s.posterior_params(0).unwrap();
        assert_eq!(p.mean.as_slice(), &[0.0, 0.0]);
        assert_eq!(p.covariance, DMatrix::identity(2, 2));

        s.update(0, &v(&[0.8, 0.4])).unwrap();
        let p = s.posterior_params(0).unwrap();
        assert_eq!(p.mean.as_slice(), &[0.4, 0.2]);
        assert_eq!(p.covariance, DMatrix::identity(2, 2) * 0.5);

        let mut s = PosteriorState::new(1, 2);
        for _ in 0..4 {
            s.update(0, &v(&[0.5, 0.5])).unwrap();
        }
        let p = s.posterior_params(0).unwrap();
        assert!((p.mean[0] - 0.4).abs() < 1e-15 && (p.mean[1] - 0.4).abs() < 1e-15);
        assert!((p.covariance.clone() - DMatrix::identity(2, 2) * 0.2).abs().max() < 1e-15);
    }

    #[test]
    fn update_examples() {
        let mut s = PosteriorState::new(4, 2);
        s.update(1, &v(&[0.8, 0.4])).unwrap();
        assert_eq!(s.count(1), 1);
        assert_eq!(s.empirical_mean(1).unwrap().as_slice(), &[0.8, 0.4]);

        let mut s = PosteriorState::new(4, 2);
        s.update(0, &v(&[1.0, 0.0])).unwrap();
        s.update(0, &v(&[0.0, 1.0])).unwrap();
        assert_eq!(s.empirical_mean(0).unwrap().as_slice(), &[0.5, 0.5]);

        let before = s.clone();
        s.update(3, &v(&[0.3, 0.3])).unwrap();
        for a in 0..3 {
            assert_eq!(s.stats(a), before.stats(a));
        }
        assert!(s.update(4, &v(&[0.3, 0.3])).is_err());
        assert!(s.update(0, &v(&[0.3])).is_err());
        assert!(s.empirical_mean(2).is_none());
    }

    #[test]
    fn empirical_covariance_examples() {
        let mut s = PosteriorState::new(1, 2);
        s.update(0, &v(&[0.0, 0.0])).unwrap();
        assert!(matches!(
            s.empirical_covariance(0),
            Err(Error::InsufficientSamples { needed: 2, have: 1 })
        ));
        s.update(0, &v(&[1.0, 1.0])).unwrap();
        let c = s.empirical_covariance(0).unwrap();
        assert!((c - DMatrix::from_element(2, 2, 0.5)).abs().max() < 1e-15);

        let mut s = PosteriorState::new(1, 2);
        for _ in 0..5 {
            s.update(0, &v(&[0.3, 0.7])).unwrap();
        }
        assert!(s.empirical_covariance(0).unwrap().abs().max() < 1e-12);
    }

    #[test]
    fn general_prior_reduces_to_default() {
        let mut s = PosteriorState::new(1, 2);
        for z in [[0.2, 0.9], [0.4, 0.1], [0.7, 0.5]] {
            s.update(0, &v(&z)).unwrap();
        }
        let a = s.posterior_params(0).unwrap();
        let b = s.posterior_params_with(0, &Prior::default_for(2)).unwrap();
        for i in 0..2 {
            assert!((a.mean[i] - b.mean[i]).abs() < 1e-12);
        }
        assert!((a.covariance - b.covariance).abs().max() < 1e-12);
    }

    #[test]
    fn general_prior_scalar_case() {
        // d = 1: prior N(m0, s0²), noise s²; closed form by hand.
        let (m0, s0, sn) = (0.3, 2.0, 0.5);
        let prior = Prior {
            mean: DVector::from_element(1, m0),
            covariance: DMatrix::from_element(1, 1, s0 * s0),
            noise_covariance: DMatrix::from_element(1, 1, sn * sn),
        };
        let mut s = PosteriorState::new(1, 1);
        let obs = [0.9, 1.1, 0.4];
        for z in obs {
            s.update(0, &v(&[z])).unwrap();
        }
        let n = obs.len() as f64;
        let prec = 1.0 / (s0 * s0) + n / (sn * sn);
        let mean = (m0 / (s0 * s0) + obs.iter().sum::<f64>() / (sn * sn)) / prec;
        let p = s.posterior_params_with(0, &prior).unwrap();
        assert!((p.covariance[(0, 0)] - 1.0 / prec).abs() < 1e-12);
        assert!((p.mean[0] - mean).abs() < 1e-12);
    }

    #[test]
    fn scalar_state() {
        let mut s = ScalarPosteriorState::new(2);
        assert_eq!(s.params(0), (0.0, 1.0));
        s.update(0, 0.6).unwrap();
        s.update(0, 0.2).unwrap();
        let (m, var) = s.params(0);
        assert!((m - 0.8 / 3.0).abs() < 1e-15);
        assert!((var - 1.0 / 3.0).abs() < 1e-15);
        assert!(s.update(2, 0.1).is_err());
        assert!(s.update(0, f64::NAN).is_err());
    }
}
