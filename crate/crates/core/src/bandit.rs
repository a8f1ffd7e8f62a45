//! Epsilon-decay bandit over training-level reductions, plus baselines.
//!
//! An arm is the vector `l` of levels skipped on each served hop, so hop `k`
//! trains to `m_k = M_k - l_k`. Arms are enumerated lexicographically with the
//! first hop most significant; arm 0 is always full training.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::argmax_first;
use crate::error::{Error, Result};
use crate::multihop_rate::{is_feasible, LevelVector, MultiHopTopology};

/// Decay constant of the exploration schedule.
const DECAY_HORIZON: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arm {
    /// Skipped levels per served hop, `l_k = M_k - m_k`.
    pub reduced: Vec<usize>,
}

impl Arm {
    pub fn levels(&self, topo: &MultiHopTopology) -> LevelVector {
        LevelVector(
            self.reduced
                .iter()
                .enumerate()
                .map(|(h, l)| topo.hop_depth(h).saturating_sub(*l))
                .collect(),
        )
    }

    pub fn is_full_training(&self) -> bool {
        self.reduced.iter().all(|&l| l == 0)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.reduced.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Every reduction vector with `0 <= l_k < M_k`, before feasibility filtering.
pub fn all_arms(topo: &MultiHopTopology) -> Vec<Arm> {
    let depths: Vec<usize> = (0..topo.hop_count()).map(|h| topo.hop_depth(h)).collect();
    let total: usize = depths.iter().product();
    (0..total)
        .map(|mut code| {
            let mut reduced = vec![0; depths.len()];
            for (slot, d) in reduced.iter_mut().zip(&depths).rev() {
                *slot = code % d;
                code /= d;
            }
            Arm { reduced }
        })
        .collect()
}

/// Feasible arms in lexicographic order.
pub fn enumerate_arms(topo: &MultiHopTopology, frame_slots: usize) -> Result<Vec<Arm>> {
    let arms: Vec<Arm> = all_arms(topo)
        .into_iter()
        .filter(|a| is_feasible(&a.levels(topo), topo, frame_slots))
        .collect();
    if arms.is_empty() {
        return Err(Error::EmptyArmSet);
    }
    Ok(arms)
}

/// Per-arm running means and the decaying exploration rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    pulls: Vec<u64>,
    means: Vec<f64>,
    epsilon: f64,
    epsilon0: f64,
    t: u64,
}

impl BanditState {
    pub fn new(num_arms: usize, epsilon0: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::EmptyArmSet);
        }
        if !(0.0..=1.0).contains(&epsilon0) {
            return Err(Error::Config(format!(
                "initial exploration rate must be in [0, 1], got {epsilon0}"
            )));
        }
        Ok(Self {
            pulls: vec![0; num_arms],
            means: vec![0.0; num_arms],
            epsilon: epsilon0,
            epsilon0,
            t: 0,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn trials(&self) -> u64 {
        self.t
    }

    /// Overrides the exploration rate, e.g. to probe pure exploration.
    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    /// Arm with the largest running mean, smallest index on ties.
    pub fn best_arm(&self) -> usize {
        argmax_first(&self.means)
    }

    /// Picks the next arm and advances the trial counter.
    ///
    /// Every arm is played once in order before the epsilon rule starts; after
    /// that the best arm is exploited with probability `1 - epsilon` and a
    /// uniformly random arm is played otherwise.
    pub fn select_arm<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let choice = match self.pulls.iter().position(|&p| p == 0) {
            Some(unpulled) => unpulled,
            None => {
                if rng.random::<f64>() < self.epsilon {
                    rng.random_range(0..self.num_arms())
                } else {
                    self.best_arm()
                }
            }
        };
        self.t += 1;
        choice
    }

    /// `epsilon_t = epsilon_{t-1} * 1000 / (1000 + t)`.
    pub fn update_epsilon(&mut self) -> f64 {
        debug_assert!(self.t >= 1, "update_epsilon before the first selection");
        self.epsilon *= DECAY_HORIZON / (DECAY_HORIZON + self.t as f64);
        self.epsilon
    }

    pub fn update_reward(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        let n = self.pulls[arm] as f64;
        self.means[arm] += (reward - self.means[arm]) / n;
    }

    /// Writes `arm,pulls,mean_reward,epsilon,t` rows.
    pub fn write_snapshot_csv<W: Write>(&self, arms: &[Arm], writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["arm", "pulls", "mean_reward", "epsilon", "t"])?;
        for (i, arm) in arms.iter().enumerate() {
            out.write_record([
                arm.to_string(),
                self.pulls[i].to_string(),
                self.means[i].to_string(),
                self.epsilon.to_string(),
                self.t.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Cumulative regret `zeta(T) = sum_t (P* - P(l^t))` from expected rewards.
pub fn regret(played_means: &[f64], optimal_mean: f64) -> Vec<f64> {
    played_means
        .iter()
        .scan(0.0, |acc, p| {
            *acc += optimal_mean - p;
            Some(*acc)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Epsilon-decay bandit over arms.
    Dynamic,
    /// Full training on every hop, every block.
    Fixed,
    /// A uniformly random feasible arm, drawn independently each block.
    Random,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Dynamic, Policy::Random, Policy::Fixed];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Dynamic => "dynamic",
            Policy::Fixed => "fixed",
            Policy::Random => "random",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A policy together with whatever state it keeps between blocks.
#[derive(Debug, Clone)]
pub enum Agent {
    Dynamic(BanditState),
    Fixed(usize),
    Random(usize),
}

impl Agent {
    pub fn new(policy: Policy, arms: &[Arm], epsilon0: f64) -> Result<Self> {
        Ok(match policy {
            Policy::Dynamic => Agent::Dynamic(BanditState::new(arms.len(), epsilon0)?),
            Policy::Fixed => Agent::Fixed(
                arms.iter()
                    .position(Arm::is_full_training)
                    .ok_or_else(|| Error::Config("full training is infeasible for this frame".into()))?,
            ),
            Policy::Random => {
                if arms.is_empty() {
                    return Err(Error::EmptyArmSet);
                }
                Agent::Random(arms.len())
            }
        })
    }

    /// Arm index to play in the next block.
    pub fn choose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self {
            Agent::Dynamic(state) => {
                let arm = state.select_arm(rng);
                state.update_epsilon();
                arm
            }
            Agent::Fixed(arm) => *arm,
            Agent::Random(n) => rng.random_range(0..*n),
        }
    }

    pub fn observe(&mut self, arm: usize, reward: f64) {
        if let Agent::Dynamic(state) = self {
            state.update_reward(arm, reward);
        }
    }

    pub fn bandit(&self) -> Option<&BanditState> {
        match self {
            Agent::Dynamic(state) => Some(state),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_hop() -> MultiHopTopology {
        MultiHopTopology::uniform(3, 4, vec![30.0, 5.0], 64).unwrap()
    }

    #[test]
    fn default_arm_space() {
        let topo = two_hop();
        assert_eq!(all_arms(&topo).len(), 9);
        let arms = enumerate_arms(&topo, 108).unwrap();
        assert_eq!(arms.len(), 9);
        assert_eq!(arms[0].reduced, vec![0, 0]);
        assert_eq!(arms[1].reduced, vec![0, 1]);
        assert_eq!(arms[8].reduced, vec![2, 2]);
        assert_eq!(arms[5].levels(&topo), LevelVector(vec![2, 1]));
        assert!(arms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_hop_arm_space() {
        let topo = MultiHopTopology::uniform(2, 4, vec![5.0], 64).unwrap();
        let arms = enumerate_arms(&topo, 108).unwrap();
        let ls: Vec<_> = arms.iter().map(|a| a.reduced[0]).collect();
        assert_eq!(ls, vec![0, 1, 2]);
    }

    #[test]
    fn tight_frame_filters_arms() {
        let topo = two_hop();
        // floor(40 / 2) * 2 = 40 excludes every arm with 10 or more levels in total.
        let arms = enumerate_arms(&topo, 40).unwrap();
        assert_eq!(arms.len(), 6);
        assert!(!arms.iter().any(Arm::is_full_training));
        assert!(Agent::new(Policy::Fixed, &arms, 1.0).is_err());
        assert!(matches!(enumerate_arms(&topo, 16), Err(Error::EmptyArmSet)));
    }

    #[test]
    fn pure_exploration_is_uniform() {
        let mut state = BanditState::new(9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in 0..9 {
            assert_eq!(state.select_arm(&mut rng), a);
            state.update_reward(a, a as f64);
        }
        let mut counts = [0usize; 9];
        let n = 100_000;
        for _ in 0..n {
            state.set_epsilon(1.0);
            counts[state.select_arm(&mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 9.0).abs() < 0.01);
        }
    }

    #[test]
    fn pure_exploitation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = BanditState::new(4, 0.0).unwrap();
        for (a, r) in [1.0, 5.0, 2.0, 5.0].into_iter().enumerate() {
            state.select_arm(&mut rng);
            state.update_reward(a, r);
        }
        for _ in 0..100 {
            assert_eq!(state.select_arm(&mut rng), 1);
        }

        let mut flat = BanditState::new(4, 0.0).unwrap();
        for a in 0..4 {
            flat.select_arm(&mut rng);
            flat.update_reward(a, 0.5);
        }
        assert_eq!(flat.select_arm(&mut rng), 0);
    }

    #[test]
    fn epsilon_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = BanditState::new(3, 1.0).unwrap();
        state.select_arm(&mut rng);
        let e1 = state.update_epsilon();
        assert!((e1 - 1000.0 / 1001.0).abs() < 1e-15);
        let mut expected = e1;
        let mut prev = e1;
        for t in 2..=500u64 {
            state.select_arm(&mut rng);
            let e = state.update_epsilon();
            expected *= 1000.0 / (1000.0 + t as f64);
            assert!(e < prev && e > 0.0);
            assert!((e - expected).abs() <= 1e-12 * expected);
            prev = e;
        }
        assert_eq!(state.trials(), 500);
    }

    #[test]
    fn running_mean_updates() {
        let mut state = BanditState::new(2, 1.0).unwrap();
        state.update_reward(0, 7.5);
        assert_eq!(state.means()[0], 7.5);
        state.update_reward(1, 1.0);
        state.update_reward(1, 3.0);
        assert_eq!(state.means()[1], 2.0);
        for _ in 0..10_000 {
            state.update_reward(0, 7.5);
        }
        assert_eq!(state.means()[0], 7.5);
        assert_eq!(state.pulls(), &[10_001, 2]);
    }

    #[test]
    fn regret_examples() {
        assert!(regret(&[2.0; 50], 2.0).iter().all(|&z| z == 0.0));
        let z = regret(&[1.0, 2.0, 1.5, 2.0], 2.0);
        assert_eq!(z, vec![1.0, 1.0, 1.5, 1.5]);
        assert!(z.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn fixed_and_random_agents() {
        let arms = enumerate_arms(&two_hop(), 108).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut fixed = Agent::new(Policy::Fixed, &arms, 1.0).unwrap();
        assert!((0..100).all(|_| fixed.choose(&mut rng) == 0));
        let mut random = Agent::new(Policy::Random, &arms, 1.0).unwrap();
        let mut seen = [false; 9];
        for _ in 0..1000 {
            seen[random.choose(&mut rng)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn greedy_from_start_locks_after_round_robin() {
        let arms = enumerate_arms(&two_hop(), 108).unwrap();
        let rewards = [1.0, 3.0, 2.0, 0.5, 0.1, 2.9, 0.0, 1.1, 0.7];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut agent = Agent::new(Policy::Dynamic, &arms, 0.0).unwrap();
        for t in 0..200 {
            let a = agent.choose(&mut rng);
            if t >= 9 {
                assert_eq!(a, 1);
            }
            agent.observe(a, rewards[a]);
        }
    }

    #[test]
    fn snapshot_csv() {
        let arms = enumerate_arms(&two_hop(), 108).unwrap();
        let state = BanditState::new(9, 1.0).unwrap();
        let mut buf = Vec::new();
        state.write_snapshot_csv(&arms, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("arm,pulls,mean_reward,epsilon,t\n\"(0,0)\",0,0,1,0"));
    }
}
