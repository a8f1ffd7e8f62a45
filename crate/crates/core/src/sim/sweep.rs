//! Policy comparison across transmit SNR.
//!
//! Evaluation block `b` draws from stream `(SweepBlock, 0, b)` at every SNR
//! point and for every policy, so the policies face the same channels.
//! Each dynamic learner `l` first plays `learning.trials` blocks on
//! `(SweepLearningEnv, l, t)`, then keeps learning while it serves the
//! evaluation blocks `b` with `b % learners == l`.

use rayon::prelude::*;

use crate::bandit::{Agent, Policy};
use crate::error::{Error, Result};
use crate::sim::config::{Scenario, ScenarioConfig};
use crate::sim::streams::{stream, Purpose};
use crate::sim::trial::{run_trial, run_trial_traced, HopTrace, TrialResult};

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPoint {
    pub transmit_snr_db: f64,
    pub policy: Policy,
    /// Reward of every evaluation block, in block order.
    pub rewards: Vec<f64>,
    pub misses: usize,
    /// Evaluation blocks per arm.
    pub arm_counts: Vec<u64>,
}

impl PolicyPoint {
    pub fn blocks(&self) -> usize {
        self.rewards.len()
    }

    pub fn mean_rate(&self) -> f64 {
        self.rewards.iter().sum::<f64>() / self.blocks() as f64
    }

    pub fn std_error(&self) -> f64 {
        let n = self.blocks() as f64;
        if self.blocks() < 2 {
            return 0.0;
        }
        let m = self.mean_rate();
        let var = self.rewards.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }

    pub fn miss_rate(&self) -> f64 {
        self.misses as f64 / self.blocks() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub arms: Vec<String>,
    pub points: Vec<PolicyPoint>,
    pub cdf_snr_db: Option<f64>,
}

impl ExperimentReport {
    pub fn point(&self, snr_db: f64, policy: Policy) -> Option<&PolicyPoint> {
        self.points
            .iter()
            .find(|p| p.policy == policy && p.transmit_snr_db == snr_db)
    }

    /// Points of one policy in ascending SNR order.
    pub fn series(&self, policy: Policy) -> Vec<&PolicyPoint> {
        let mut s: Vec<_> = self.points.iter().filter(|p| p.policy == policy).collect();
        s.sort_by(|a, b| a.transmit_snr_db.total_cmp(&b.transmit_snr_db));
        s
    }
}

fn evaluation(scn: &Scenario, arm: usize, seed: u64, block: u64) -> Result<TrialResult> {
    run_trial(scn, arm, &mut stream(seed, Purpose::SweepBlock, 0, block))
}

fn dynamic_learner(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    learner: u64,
    learners: u64,
) -> Result<Vec<(u64, TrialResult)>> {
    let seed = cfg.seed;
    let mut agent = Agent::new(Policy::Dynamic, &scn.arms, cfg.learning.epsilon0)?;
    let mut agent_rng = stream(seed, Purpose::SweepAgent, learner, 0);
    for t in 0..cfg.learning.trials as u64 {
        let arm = agent.choose(&mut agent_rng);
        let mut env = stream(seed, Purpose::SweepLearningEnv, learner, t);
        let r = run_trial(scn, arm, &mut env)?;
        agent.observe(arm, r.reward);
    }
    (learner..cfg.sweep.blocks as u64)
        .step_by(learners as usize)
        .map(|b| {
            let arm = agent.choose(&mut agent_rng);
            let r = evaluation(scn, arm, seed, b)?;
            agent.observe(arm, r.reward);
            Ok((b, r))
        })
        .collect()
}

/// Evaluates one policy at one transmit SNR.
pub fn run_policy(scn: &Scenario, cfg: &ScenarioConfig, policy: Policy) -> Result<PolicyPoint> {
    let blocks = cfg.sweep.blocks;
    let seed = cfg.seed;
    let results: Vec<TrialResult> = match policy {
        Policy::Fixed => {
            let arm = scn
                .fixed_arm()
                .ok_or_else(|| Error::Config("full training is infeasible for this frame".into()))?;
            (0..blocks as u64)
                .into_par_iter()
                .map(|b| evaluation(scn, arm, seed, b))
                .collect::<Result<_>>()?
        }
        Policy::Random => {
            let mut agent = Agent::new(Policy::Random, &scn.arms, 0.0)?;
            let arms: Vec<usize> = (0..blocks as u64)
                .map(|b| agent.choose(&mut stream(seed, Purpose::RandomArm, 0, b)))
                .collect();
            arms.into_par_iter()
                .enumerate()
                .map(|(b, arm)| evaluation(scn, arm, seed, b as u64))
                .collect::<Result<_>>()?
        }
        Policy::Dynamic => {
            let learners = cfg.sweep.learners.clamp(1, blocks.max(1)) as u64;
            let per_learner: Vec<Vec<(u64, TrialResult)>> = (0..learners)
                .into_par_iter()
                .map(|l| dynamic_learner(scn, cfg, l, learners))
                .collect::<Result<_>>()?;
            let mut all: Vec<_> = per_learner.into_iter().flatten().collect();
            all.sort_by_key(|(b, _)| *b);
            all.into_iter().map(|(_, r)| r).collect()
        }
    };
    let mut arm_counts = vec![0u64; scn.arms.len()];
    for r in &results {
        arm_counts[r.arm] += 1;
    }
    Ok(PolicyPoint {
        transmit_snr_db: scn.transmit_snr_db,
        policy,
        misses: results.iter().filter(|r| r.any_miss).count(),
        rewards: results.iter().map(|r| r.reward).collect(),
        arm_counts,
    })
}

/// Runs every configured policy at every SNR in `snr_list`.
pub fn run_sweep(cfg: &ScenarioConfig, snr_list: &[f64]) -> Result<ExperimentReport> {
    if cfg.sweep.blocks == 0 {
        return Err(Error::Config("sweep.blocks must be positive".into()));
    }
    let mut points = Vec::new();
    let mut arms = Vec::new();
    for &snr in snr_list {
        let scn = cfg.scenario(snr)?;
        arms = scn.arms.iter().map(ToString::to_string).collect();
        for &policy in &cfg.sweep.policies {
            points.push(run_policy(&scn, cfg, policy)?);
        }
    }
    Ok(ExperimentReport {
        arms,
        points,
        cdf_snr_db: cfg.sweep.cdf_snr_db,
    })
}

/// Per-candidate measurements of the first `blocks` evaluation blocks when
/// playing `arm`, tagged with their block index.
pub fn trace_blocks(scn: &Scenario, arm: usize, seed: u64, blocks: usize) -> Result<Vec<(u64, HopTrace)>> {
    let mut out = Vec::new();
    for b in 0..blocks as u64 {
        let mut trace = Vec::new();
        run_trial_traced(
            scn,
            arm,
            &mut stream(seed, Purpose::SweepBlock, 0, b),
            Some(&mut trace),
        )?;
        out.extend(trace.into_iter().map(|t| (b, t)));
    }
    Ok(out)
}

/// Sorted distinct sample values with the empirical CDF at each.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    out
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical value of the two-sample KS test at significance 0.01.
pub fn ks_critical_001(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}
