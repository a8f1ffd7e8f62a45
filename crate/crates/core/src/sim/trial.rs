//! One transmission block: draw channels, train every hop in turn, score it.

use rand::Rng;

use crate::array_channel::sample_channel_with;
use crate::bandit::Arm;
use crate::beam_training::{train_hop_traced, TraceEntry, TrainingOutcome};
use crate::error::Result;
use crate::multihop_rate::{multihop_rate, training_overhead, LevelVector, Outage};
use crate::sim::config::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Index of the played arm in the scenario's arm list.
    pub arm: usize,
    pub levels: LevelVector,
    pub hops: Vec<TrainingOutcome>,
    pub snr_min: f64,
    /// Total training slots `L'`.
    pub overhead: usize,
    /// Instantaneous spectral efficiency (bps/Hz).
    pub reward: f64,
    pub any_miss: bool,
}

impl TrialResult {
    /// Recomputes the reward from this result's own SNRs and levels.
    pub fn recomputed_reward(&self, scn: &Scenario) -> Result<f64> {
        let snrs: Vec<f64> = self.hops.iter().map(|h| h.snr).collect();
        multihop_rate(
            &snrs,
            &self.levels,
            &scn.topology,
            scn.frame_slots(),
            Outage::Instantaneous {
                threshold: scn.snr_threshold,
            },
        )
    }
}

/// A trace entry tagged with its 0-based served hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopTrace {
    pub hop: usize,
    pub entry: TraceEntry,
}

/// Plays arm `arm` for one block.
///
/// All hop channels are drawn first, so two calls starting from the same
/// generator state see the same channels whatever arm they play.
pub fn run_trial<R: Rng + ?Sized>(scn: &Scenario, arm: usize, rng: &mut R) -> Result<TrialResult> {
    run_trial_traced(scn, arm, rng, None)
}

pub fn run_trial_traced<R: Rng + ?Sized>(
    scn: &Scenario,
    arm: usize,
    rng: &mut R,
    mut trace: Option<&mut Vec<HopTrace>>,
) -> Result<TrialResult> {
    let played: &Arm = &scn.arms[arm];
    let levels = played.levels(&scn.topology);
    let channels: Vec<_> = scn
        .topology
        .hops()
        .map(|_| sample_channel_with(scn.sigma_beta, scn.angle_prior, rng))
        .collect();

    let mut hops = Vec::with_capacity(channels.len());
    let mut entries = Vec::new();
    for (h, (k, channel)) in scn.topology.hops().zip(&channels).enumerate() {
        entries.clear();
        let outcome = train_hop_traced(
            channel,
            &scn.codebooks[k],
            &scn.codebooks[k + 1],
            levels.0[h],
            &scn.models[h],
            &scn.detector,
            rng,
            trace.is_some().then_some(&mut entries),
        )?;
        if let Some(t) = trace.as_deref_mut() {
            t.extend(entries.iter().map(|&entry| HopTrace { hop: h, entry }));
        }
        hops.push(outcome);
    }

    let snrs: Vec<f64> = hops.iter().map(|o| o.snr).collect();
    let reward = multihop_rate(
        &snrs,
        &levels,
        &scn.topology,
        scn.frame_slots(),
        Outage::Instantaneous {
            threshold: scn.snr_threshold,
        },
    )?;
    Ok(TrialResult {
        arm,
        overhead: training_overhead(&levels, &scn.topology)?,
        snr_min: snrs.iter().copied().fold(f64::INFINITY, f64::min),
        any_miss: hops.iter().any(|o| o.miss_detected),
        levels,
        hops,
        reward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::ScenarioConfig;
    use crate::sim::streams::{stream, Purpose};

    #[test]
    fn fixed_arm_overhead_is_48() {
        let scn = ScenarioConfig::default().scenario(40.0).unwrap();
        let mut rng = stream(1, Purpose::Oracle, 0, 0);
        for _ in 0..200 {
            let r = run_trial(&scn, 0, &mut rng).unwrap();
            assert_eq!(r.overhead, 48);
            assert_eq!(r.levels, LevelVector(vec![3, 3]));
            assert_eq!(r.hops.iter().map(|h| h.slots_used).sum::<usize>(), 48);
        }
    }

    #[test]
    fn noiseless_reward_formula() {
        let scn = ScenarioConfig::calibrated().scenario(40.0).unwrap().noiseless();
        let mut rng = stream(2, Purpose::Oracle, 0, 0);
        for _ in 0..100 {
            let r = run_trial(&scn, 0, &mut rng).unwrap();
            assert!(r.hops.iter().all(|h| h.snr >= scn.snr_threshold));
            let expected = (1.0 - 48.0 / 108.0) * 0.5 * (1.0 + r.snr_min).log2();
            assert!((r.reward - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn outage_zeroes_reward() {
        let mut cfg = ScenarioConfig::default();
        cfg.budget.snr_threshold_db = 400.0;
        let scn = cfg.scenario(40.0).unwrap();
        let mut rng = stream(3, Purpose::Oracle, 0, 0);
        for arm in 0..scn.arms.len() {
            assert_eq!(run_trial(&scn, arm, &mut rng).unwrap().reward, 0.0);
        }
    }

    #[test]
    fn reward_audit_and_trace() {
        let scn = ScenarioConfig::default().scenario(60.0).unwrap();
        let mut rng = stream(4, Purpose::Oracle, 0, 0);
        for arm in 0..scn.arms.len() {
            let mut trace = Vec::new();
            let r = run_trial_traced(&scn, arm, &mut rng, Some(&mut trace)).unwrap();
            assert_eq!(r.reward, r.recomputed_reward(&scn).unwrap());
            assert_eq!(trace.len(), r.overhead);
            assert_eq!(trace.last().unwrap().hop, 1);
        }
    }
}
