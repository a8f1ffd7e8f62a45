//! Brute-force estimate of every arm's expected reward.
//!
//! Sample `s` uses stream `(Oracle, 0, s)`, and every arm replays that same
//! stream, so arms are compared on identical channels.

use rayon::prelude::*;

use crate::codebook::argmax_first;
use crate::error::Result;
use crate::sim::config::Scenario;
use crate::sim::streams::{stream, Purpose};
use crate::sim::trial::run_trial;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmMeans {
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub miss_rates: Vec<f64>,
    /// Index of the best arm, smallest on ties.
    pub best: usize,
    pub samples: usize,
}

impl ArmMeans {
    pub fn best_mean(&self) -> f64 {
        self.means[self.best]
    }

    /// Expected-reward shortfall of playing `arm`.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best_mean() - self.means[arm]
    }
}

pub fn oracle_arm_means(scn: &Scenario, samples: usize, seed: u64) -> Result<ArmMeans> {
    let n_arms = scn.arms.len();
    let per_sample: Vec<Vec<(f64, bool)>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let base = stream(seed, Purpose::Oracle, 0, s);
            (0..n_arms)
                .map(|arm| {
                    let r = run_trial(scn, arm, &mut base.clone())?;
                    Ok((r.reward, r.any_miss))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let n = samples as f64;
    let mut means = vec![0.0; n_arms];
    let mut misses = vec![0usize; n_arms];
    for row in &per_sample {
        for (a, &(r, miss)) in row.iter().enumerate() {
            means[a] += r;
            misses[a] += miss as usize;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut sq = vec![0.0; n_arms];
    for row in &per_sample {
        for (a, &(r, _)) in row.iter().enumerate() {
            sq[a] += (r - means[a]).powi(2);
        }
    }
    let std_errors = sq
        .iter()
        .map(|s| {
            if samples > 1 {
                (s / (n - 1.0) / n).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(ArmMeans {
        best: argmax_first(&means),
        means,
        std_errors,
        miss_rates: misses.iter().map(|&m| m as f64 / n).collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::ScenarioConfig;

    #[test]
    fn default_scenario_arity() {
        let scn = ScenarioConfig::default().scenario(50.0).unwrap();
        let o = oracle_arm_means(&scn, 200, 1).unwrap();
        assert_eq!(o.means.len(), 9);
        assert_eq!(o.std_errors.len(), 9);
        assert!(o.best < 9);
        assert!(o.means.iter().all(|&m| m <= o.best_mean()));
        assert_eq!(o.gap(o.best), 0.0);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let scn = ScenarioConfig::default().scenario(30.0).unwrap();
        assert_eq!(
            oracle_arm_means(&scn, 50, 7).unwrap(),
            oracle_arm_means(&scn, 50, 7).unwrap()
        );
    }

    #[test]
    fn single_hop_scenario() {
        let mut cfg = ScenarioConfig::calibrated();
        cfg.topology.distances_m = vec![10.0];
        cfg.topology.branching = vec![8, 8];
        let scn = cfg.scenario(60.0).unwrap();
        assert_eq!(scn.arms.len(), 2);
        let o = oracle_arm_means(&scn, 200, 1).unwrap();
        // Strong link: full training wins.
        assert_eq!(o.best, 0);
        assert!(o.gap(1) > 0.0);
    }
}
