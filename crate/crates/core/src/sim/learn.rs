//! The epsilon-decay learning loop, repeated over independent runs.
//!
//! Run `r` draws its arm choices from stream `(LearningAgent, r, 0)` and the
//! block at trial `t` from `(LearningEnv, r, t)`. Regret is measured against
//! oracle expected rewards, never against the noisy rewards the agent sees.

use rayon::prelude::*;

use crate::bandit::{Agent, BanditState, Policy};
use crate::error::{Error, Result};
use crate::sim::config::Scenario;
use crate::sim::oracle::ArmMeans;
use crate::sim::streams::{stream, Purpose};
use crate::sim::trial::run_trial;

/// One learning run: which arm was played at every trial, and what it paid.
#[derive(Debug, Clone)]
pub struct LearningRun {
    pub played: Vec<usize>,
    pub rewards: Vec<f64>,
    pub state: BanditState,
}

impl LearningRun {
    /// The learner's answer: the arm with the largest running mean.
    pub fn output_arm(&self) -> usize {
        self.state.best_arm()
    }
}

pub fn learning_run(
    scn: &Scenario,
    trials: usize,
    epsilon0: f64,
    seed: u64,
    run: u64,
) -> Result<LearningRun> {
    let mut agent = Agent::new(Policy::Dynamic, &scn.arms, epsilon0)?;
    let mut agent_rng = stream(seed, Purpose::LearningAgent, run, 0);
    let mut played = Vec::with_capacity(trials);
    let mut rewards = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let arm = agent.choose(&mut agent_rng);
        let result = run_trial(scn, arm, &mut stream(seed, Purpose::LearningEnv, run, t))?;
        agent.observe(arm, result.reward);
        played.push(arm);
        rewards.push(result.reward);
    }
    let Agent::Dynamic(state) = agent else {
        unreachable!("constructed as dynamic")
    };
    Ok(LearningRun {
        played,
        rewards,
        state,
    })
}

#[derive(Debug, Clone)]
pub struct LearningReport {
    pub transmit_snr_db: f64,
    pub runs: usize,
    /// `zeta(t) / t` averaged over runs, for `t = 1..=T`.
    pub avg_regret: Vec<f64>,
    /// Expected regret of the arm played at trial `t`, averaged over runs.
    pub avg_instant_regret: Vec<f64>,
    /// Like `avg_regret` but charged with the realized rewards.
    pub avg_realized_regret: Vec<f64>,
    /// Pulls per arm summed over runs.
    pub pulls: Vec<u64>,
    /// Pull-weighted mean observed reward per arm across runs.
    pub mean_rewards: Vec<f64>,
    /// How many runs ended with each arm as their output.
    pub output_counts: Vec<usize>,
    pub oracle: ArmMeans,
}

impl LearningReport {
    /// Fraction of runs whose output arm is the oracle's best arm.
    pub fn output_accuracy(&self) -> f64 {
        self.output_counts[self.oracle.best] as f64 / self.runs as f64
    }
}

pub fn run_learning(
    scn: &Scenario,
    oracle: &ArmMeans,
    trials: usize,
    runs: usize,
    epsilon0: f64,
    seed: u64,
) -> Result<LearningReport> {
    if oracle.means.len() != scn.arms.len() {
        return Err(Error::Precondition(format!(
            "oracle covers {} arms, scenario has {}",
            oracle.means.len(),
            scn.arms.len()
        )));
    }
    let results: Vec<LearningRun> = (0..runs as u64)
        .into_par_iter()
        .map(|r| learning_run(scn, trials, epsilon0, seed, r))
        .collect::<Result<_>>()?;

    let n_arms = scn.arms.len();
    let best = oracle.best_mean();
    let mut avg_regret = vec![0.0; trials];
    let mut avg_instant = vec![0.0; trials];
    let mut avg_realized = vec![0.0; trials];
    let mut pulls = vec![0u64; n_arms];
    let mut reward_sums = vec![0.0; n_arms];
    let mut output_counts = vec![0usize; n_arms];
    for run in &results {
        let (mut expected, mut realized) = (0.0, 0.0);
        for (t, (&arm, &reward)) in run.played.iter().zip(&run.rewards).enumerate() {
            let gap = oracle.gap(arm);
            expected += gap;
            realized += best - reward;
            avg_instant[t] += gap;
            avg_regret[t] += expected / (t + 1) as f64;
            avg_realized[t] += realized / (t + 1) as f64;
        }
        for a in 0..n_arms {
            pulls[a] += run.state.pulls()[a];
            reward_sums[a] += run.state.means()[a] * run.state.pulls()[a] as f64;
        }
        output_counts[run.output_arm()] += 1;
    }
    let n = runs as f64;
    for v in [&mut avg_regret, &mut avg_instant, &mut avg_realized] {
        v.iter_mut().for_each(|x| *x /= n);
    }
    let mean_rewards = reward_sums
        .iter()
        .zip(&pulls)
        .map(|(s, &p)| if p > 0 { s / p as f64 } else { 0.0 })
        .collect();
    Ok(LearningReport {
        transmit_snr_db: scn.transmit_snr_db,
        runs,
        avg_regret,
        avg_instant_regret: avg_instant,
        avg_realized_regret: avg_realized,
        pulls,
        mean_rewards,
        output_counts,
        oracle: oracle.clone(),
    })
}
