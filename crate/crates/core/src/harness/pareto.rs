use crate::error::Result;
use crate::objective::ActionSet;

/// Smallest uniform boost `ε ≥ 0` such that `μ_a + ε` is dominated by no other mean:
/// `max(0, max_b min_i (μ_{b,i} − μ_{a,i}))`.
pub fn pareto_regret(actions: &ActionSet, a: usize) -> Result<f64> {
    actions.check_index(a)?;
    let mu_a = actions.mean(a).as_slice();
    let eps = actions
        .means()
        .map(|mu_b| {
            mu_b.as_slice()
                .iter()
                .zip(mu_a)
                .map(|(b, a)| b - a)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = ActionSet::from_means([vec![0.5, 0.5], vec![0.7, 0.8]]).unwrap();
        assert!((pareto_regret(&s, 0).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(pareto_regret(&s, 1).unwrap(), 0.0);
        let s = ActionSet::from_means([vec![0.4, 0.4], vec![0.4, 0.4]]).unwrap();
        assert_eq!(pareto_regret(&s, 0).unwrap(), 0.0);
        let t = crate::table1::actions();
        for a in crate::objective::pareto_front(&t) {
            assert_eq!(pareto_regret(&t, a).unwrap(), 0.0);
        }
        assert!(pareto_regret(&t, 10).is_err());
    }
}
