use serde::Serialize;

/// Pointwise summary of cumulative-regret curves over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretCurve {
    pub label: String,
    /// `per_repetition[r][t-1]` is the cumulative regret of repetition `r` after episode `t`.
    pub per_repetition: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl RegretCurve {
    pub fn from_gaps<'a>(label: impl Into<String>, gap_runs: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let per_repetition: Vec<Vec<f64>> = gap_runs
            .into_iter()
            .map(|gaps| {
                gaps.iter()
                    .scan(0.0, |acc, g| {
                        *acc += g;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let len = per_repetition.first().map_or(0, Vec::len);
        let reps = per_repetition.len() as f64;
        let mut mean = vec![0.0; len];
        let mut min = vec![f64::INFINITY; len];
        let mut max = vec![f64::NEG_INFINITY; len];
        for run in &per_repetition {
            for (t, &v) in run.iter().enumerate() {
                mean[t] += v;
                min[t] = min[t].min(v);
                max[t] = max[t].max(v);
            }
        }
        for (t, m) in mean.iter_mut().enumerate() {
            // Keep the mean inside [min, max] despite rounding.
            *m = (*m / reps).clamp(min[t], max[t]);
        }
        Self {
            label: label.into(),
            per_repetition,
            mean,
            min,
            max,
        }
    }

    pub fn horizon(&self) -> usize {
        self.mean.len()
    }

    /// Mean cumulative regret after the last episode.
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn finals(&self) -> Vec<f64> {
        self.per_repetition
            .iter()
            .map(|r| r.last().copied().unwrap_or(0.0))
            .collect()
    }

    /// Mean cumulative regret after episode `t` (1-based).
    pub fn mean_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.mean[t - 1]
        }
    }

    /// Average regret per episode over the last `window` episodes of the mean curve.
    pub fn final_slope(&self, window: usize) -> f64 {
        let t = self.horizon();
        let w = window.min(t);
        if w == 0 {
            return 0.0;
        }
        (self.mean_at(t) - self.mean_at(t - w)) / w as f64
    }
}
