//! Outcome models: multivariate normal and multi-Bernoulli noise around the
//! true action means, sampled through paired counter-based streams.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::objective::{ActionSet, ObjectiveVector};
use crate::preference::Preference;
use crate::rng::{Domain, NoiseStream};

const PSD_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Largest dimension for which multi-Bernoulli expectations are enumerated exactly.
const MAX_ENUMERATION_DIM: usize = 16;

/// A covariance matrix together with a factor `L` such that `L Lᵀ = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    matrix: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl Covariance {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::config("covariance must not be empty"));
        }
        for row in rows {
            check_dim(d, row.len())?;
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("covariance entries must be finite"));
        }
        for i in 0..d {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::config("covariance must be symmetric"));
                }
            }
        }
        let factor = match matrix.clone().cholesky() {
            Some(ch) => ch.l(),
            None => {
                // Semi-definite: V · diag(sqrt(λ)) with tiny negative eigenvalues clamped.
                let eig = SymmetricEigen::new(matrix.clone());
                if let Some(min) = eig.eigenvalues.iter().copied().find(|l| *l < -PSD_TOLERANCE) {
                    return Err(Error::config(format!(
                        "covariance is not positive semi-definite (eigenvalue {min})"
                    )));
                }
                let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
                &eig.eigenvectors * DMatrix::from_diagonal(&roots)
            }
        };
        Ok(Self { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    /// `z = μ_a + L η` with `η` standard normal. One covariance per action,
    /// or a single shared one.
    Mvn(Vec<Covariance>),
    /// `z_i = 1` if `u_i < μ_{a,i}` else `0`, with `u` uniform.
    MultiBernoulli,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum NoiseConfig {
    Mvn {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_action: Option<Vec<Vec<Vec<f64>>>>,
    },
    MultiBernoulli,
}

/// An action set plus its outcome distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentConfig", into = "EnvironmentConfig")]
pub struct EnvironmentSpec {
    actions: ActionSet,
    noise: Noise,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnvironmentConfig {
    noise: NoiseConfig,
    #[serde(flatten)]
    actions: ActionSet,
}

impl TryFrom<EnvironmentConfig> for EnvironmentSpec {
    type Error = Error;

    fn try_from(cfg: EnvironmentConfig) -> Result<Self> {
        let noise = match cfg.noise {
            NoiseConfig::MultiBernoulli => Noise::MultiBernoulli,
            NoiseConfig::Mvn { covariance, per_action } => match (covariance, per_action) {
                (Some(c), None) => Noise::Mvn(vec![Covariance::new(&c)?]),
                (None, Some(list)) => Noise::Mvn(list.iter().map(|c| Covariance::new(c)).collect::<Result<_>>()?),
                _ => {
                    return Err(Error::config(
                        "mvn noise needs exactly one of `covariance` or `per_action`",
                    ))
                }
            },
        };
        EnvironmentSpec::new(cfg.actions, noise)
    }
}

impl From<EnvironmentSpec> for EnvironmentConfig {
    fn from(env: EnvironmentSpec) -> Self {
        let noise = match env.noise {
            Noise::MultiBernoulli => NoiseConfig::MultiBernoulli,
            Noise::Mvn(covs) if covs.len() == 1 => NoiseConfig::Mvn {
                covariance: Some(covs[0].rows()),
                per_action: None,
            },
            Noise::Mvn(covs) => NoiseConfig::Mvn {
                covariance: None,
                per_action: Some(covs.iter().map(Covariance::rows).collect()),
            },
        };
        Self {
            noise,
            actions: env.actions,
        }
    }
}

/// One observed outcome `z(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: ObjectiveVector,
    pub episode: u64,
    pub action: usize,
}

/// `E[f(z) | a]`, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarizedValue {
    pub mean: f64,
    /// Zero for exact values.
    pub std_error: f64,
    pub exact: bool,
}

impl EnvironmentSpec {
    pub fn new(actions: ActionSet, noise: Noise) -> Result<Self> {
        for (i, m) in actions.means().enumerate() {
            if m.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::config(format!("mean of action {i} lies outside [0, 1]")));
            }
        }
        if let Noise::Mvn(covs) = &noise {
            if covs.len() != 1 && covs.len() != actions.len() {
                return Err(Error::config(format!(
                    "expected 1 or {} covariances, got {}",
                    actions.len(),
                    covs.len()
                )));
            }
            for c in covs {
                check_dim(actions.dim(), c.dim())?;
            }
        }
        Ok(Self { actions, noise })
    }

    pub fn mvn(actions: ActionSet, covariance: &[Vec<f64>]) -> Result<Self> {
        Self::new(actions, Noise::Mvn(vec![Covariance::new(covariance)?]))
    }

    pub fn multi_bernoulli(actions: ActionSet) -> Result<Self> {
        Self::new(actions, Noise::MultiBernoulli)
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn noise(&self) -> &Noise {
        &self.noise
    }

    pub fn dim(&self) -> usize {
        self.actions.dim()
    }

    fn covariance(&self, action: usize) -> Option<&Covariance> {
        match &self.noise {
            Noise::Mvn(covs) if covs.len() == 1 => Some(&covs[0]),
            Noise::Mvn(covs) => Some(&covs[action]),
            Noise::MultiBernoulli => None,
        }
    }

    /// Outcome of playing `action` at `episode` (episodes start at 1).
    ///
    /// The primitive draws come from the `(repetition, episode)` cell of
    /// `stream` and never depend on `action`.
    pub fn sample_outcome(&self, action: usize, stream: &NoiseStream, episode: u64) -> Result<Observation> {
        self.actions.check_index(action)?;
        if episode == 0 {
            return Err(Error::invalid("episodes are numbered from 1"));
        }
        let values = self.draw(action, stream, Domain::Outcome, episode);
        Ok(Observation {
            values: ObjectiveVector::from_vec_unchecked(values),
            episode,
            action,
        })
    }

    fn draw(&self, action: usize, stream: &NoiseStream, domain: Domain, counter: u64) -> Vec<f64> {
        let d = self.dim();
        let mean = self.actions.mean(action).as_slice();
        let mut prim = vec![0.0; d];
        match self.covariance(action) {
            Some(cov) => {
                stream.normals(domain, counter, 0, &mut prim);
                let noise = cov.factor() * DVector::from_column_slice(&prim);
                mean.iter().zip(noise.iter()).map(|(m, n)| m + n).collect()
            }
            None => {
                stream.uniforms(domain, counter, 0, &mut prim);
                mean.iter()
                    .zip(&prim)
                    .map(|(m, u)| if *u < *m { 1.0 } else { 0.0 })
                    .collect()
            }
        }
    }

    /// `E[f(z) | a]` using a closed form when one exists, otherwise a
    /// Monte-Carlo average over `n_samples` draws keyed by `seed`.
    pub fn expected_scalarized(
        &self,
        pref: &Preference,
        action: usize,
        n_samples: u64,
        seed: u64,
    ) -> Result<ScalarizedValue> {
        check_dim(self.dim(), pref.dim())?;
        self.actions.check_index(action)?;
        let mean = self.actions.mean(action);
        let exact = |v: f64| ScalarizedValue { mean: v, std_error: 0.0, exact: true };
        match (pref, &self.noise) {
            (Preference::Linear(_), _) => return Ok(exact(pref.score(mean.as_slice()))),
            (Preference::EpsilonConstraint(ec), Noise::MultiBernoulli) => {
                // z_i ∈ {0, 1}: a positive threshold is met iff z_i = 1.
                let m = mean.as_slice();
                let p: f64 = ec.constraints().filter(|(_, eps)| *eps > 0.0).map(|(i, _)| m[i]).product();
                return Ok(exact(m[ec.target()] * p));
            }
            (_, Noise::MultiBernoulli) if self.dim() <= MAX_ENUMERATION_DIM => {
                return Ok(exact(self.enumerate_bernoulli(pref, mean.as_slice())));
            }
            _ => {}
        }
        self.expected_scalarized_mc(pref, action, n_samples, seed)
    }

    /// Monte-Carlo estimate of `E[f(z) | a]` regardless of closed forms.
    pub fn expected_scalarized_mc(
        &self,
        pref: &Preference,
        action: usize,
        n_samples: u64,
        seed: u64,
    ) -> Result<ScalarizedValue> {
        check_dim(self.dim(), pref.dim())?;
        self.actions.check_index(action)?;
        if n_samples == 0 {
            return Err(Error::invalid("need at least one Monte-Carlo sample"));
        }
        let stream = NoiseStream::new(seed, action as u64);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for k in 0..n_samples {
            let z = self.draw(action, &stream, Domain::Trial, k);
            let v = pref.score(&z);
            sum += v;
            sum_sq += v * v;
        }
        let n = n_samples as f64;
        let mean = sum / n;
        let var = if n_samples > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
        Ok(ScalarizedValue {
            mean,
            std_error: (var / n).sqrt(),
            exact: false,
        })
    }

    fn enumerate_bernoulli(&self, pref: &Preference, mean: &[f64]) -> f64 {
        let d = mean.len();
        let mut z = vec![0.0; d];
        (0u32..1 << d)
            .map(|bits| {
                let mut p = 1.0;
                for i in 0..d {
                    let one = bits >> i & 1 == 1;
                    z[i] = if one { 1.0 } else { 0.0 };
                    p *= if one { mean[i] } else { 1.0 - mean[i] };
                }
                p * pref.score(&z)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_actions() -> ActionSet {
        ActionSet::from_means([vec![0.78, 0.60], vec![0.54, 0.72]]).unwrap()
    }

    #[test]
    fn zero_covariance_is_deterministic() {
        let env = EnvironmentSpec::mvn(two_actions(), &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let s = NoiseStream::new(1, 0);
        for t in 1..20 {
            let z = env.sample_outcome(1, &s, t).unwrap();
            assert_eq!(z.values.as_slice(), &[0.54, 0.72]);
        }
    }

    #[test]
    fn degenerate_bernoulli() {
        let env = EnvironmentSpec::multi_bernoulli(ActionSet::from_means([vec![1.0, 0.0]]).unwrap()).unwrap();
        let s = NoiseStream::new(9, 2);
        for t in 1..200 {
            assert_eq!(env.sample_outcome(0, &s, t).unwrap().values.as_slice(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(EnvironmentSpec::mvn(two_actions(), &[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(EnvironmentSpec::mvn(two_actions(), &[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(EnvironmentSpec::mvn(two_actions(), &[vec![1.0]]).is_err());
        let outside = ActionSet::from_means([vec![1.2, 0.5]]).unwrap();
        assert!(EnvironmentSpec::multi_bernoulli(outside).is_err());
        let env = EnvironmentSpec::multi_bernoulli(two_actions()).unwrap();
        assert!(env.sample_outcome(2, &NoiseStream::new(0, 0), 1).is_err());
        assert!(env.sample_outcome(0, &NoiseStream::new(0, 0), 0).is_err());
    }

    #[test]
    fn semidefinite_covariance_factorises() {
        let c = Covariance::new(&[vec![0.1, 0.1], vec![0.1, 0.1]]).unwrap();
        let recon = c.factor() * c.factor().transpose();
        assert!((recon - c.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"noise":{"type":"mvn","covariance":[[0.1,0.05],[0.05,0.1]]},"dimension":2,
            "actions":[{"name":"a","mean":[0.5,0.5]},{"name":"b","mean":[0.2,0.9]}]}"#;
        let env: EnvironmentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(env.actions().len(), 2);
        let again: EnvironmentSpec = serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
        assert_eq!(env, again);
        let bad = r#"{"noise":{"type":"mvn"},"actions":[{"name":"a","mean":[0.5]}]}"#;
        assert!(serde_json::from_str::<EnvironmentSpec>(bad).is_err());
    }

    #[test]
    fn epsilon_constraint_product_form() {
        let env = EnvironmentSpec::multi_bernoulli(two_actions()).unwrap();
        let pref = Preference::epsilon_constraint(2, 2, &[(1, 0.5)]).unwrap();
        let v = env.expected_scalarized(&pref, 0, 1, 0).unwrap();
        assert!(v.exact);
        assert!((v.mean - 0.468).abs() < 1e-12);
        let v = env.expected_scalarized(&pref, 1, 1, 0).unwrap();
        assert!((v.mean - 0.3888).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_enumeration_matches_product_form() {
        let env = EnvironmentSpec::multi_bernoulli(two_actions()).unwrap();
        let pref = Preference::epsilon_constraint(2, 2, &[(1, 0.5)]).unwrap();
        assert!((env.enumerate_bernoulli(&pref, &[0.78, 0.60]) - 0.468).abs() < 1e-12);
    }

    #[test]
    fn linear_expectation_is_exact() {
        let env = EnvironmentSpec::mvn(two_actions(), &[vec![0.1, 0.05], vec![0.05, 0.1]]).unwrap();
        let pref = Preference::linear(vec![0.4, 0.6]).unwrap();
        let v = env.expected_scalarized(&pref, 0, 10, 0).unwrap();
        assert!(v.exact && (v.mean - 0.672).abs() < 1e-12);
        assert!(env.expected_scalarized_mc(&pref, 0, 0, 0).is_err());
    }
}
