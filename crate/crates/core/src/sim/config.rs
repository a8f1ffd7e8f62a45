//! Scenario configuration and its resolution into simulation objects.
//!
//! The file format is TOML; every section and key is optional and falls back
//! to the two-hop 240 GHz defaults below.
//!
//! ```toml
//! seed = 1
//! policy = "dynamic"
//!
//! [topology]
//! distances_m = [30.0, 5.0]   # one per hop; UE count is hops + 1
//! branching = [4, 4, 4]       # training signals per level at each UE
//!
//! [array]
//! num_antennas = 64
//! spacing_ratio = 0.5
//!
//! [codebook]
//! phase_shift = 2.24          # or per_level = [..], one per level
//!
//! [channel]
//! sigma_beta = 1.0
//! angle_prior = "uniform_sine"
//!
//! [frame]
//! carrier_hz = 240e9
//! subcarrier_spacing_hz = 120e3
//! max_speed_kmh = 5.0
//!
//! [budget]
//! transmit_snr_db = [20.0, 30.0, 40.0, 50.0, 60.0]
//! noise_psd_dbm_hz = -204.0
//! bandwidth_hz = 4e9
//! path_loss_exponent = 2.02
//! reference_distance_m = 1.0
//! matched_filter_length = 33333
//! snr_threshold_db = -50.0
//!
//! [detector]
//! p_fa = 0.01
//!
//! [learning]
//! epsilon0 = 1.0
//! trials = 2000
//! runs = 200
//! oracle_samples = 20000
//!
//! [sweep]
//! blocks = 10000
//! learners = 50
//! policies = ["dynamic", "random", "fixed"]
//! cdf_snr_db = 50.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array_channel::{db_to_linear, AnglePrior, ArrayConfig, LinkBudget};
use crate::bandit::{enumerate_arms, Arm, Policy};
use crate::beam_training::{DetectorConfig, MeasurementModel};
use crate::codebook::{build_codebook_per_level, exact_log, MultiResCodebook, DEFAULT_PHASE_SHIFT};
use crate::error::{Error, Result};
use crate::multihop_rate::{kmh_to_mps, FrameConfig, MultiHopTopology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub distances_m: Vec<f64>,
    pub branching: Vec<usize>,
    /// 1-based served endpoints; the whole chain when absent.
    pub endpoints: Option<(usize, usize)>,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            distances_m: vec![30.0, 5.0],
            branching: vec![4, 4, 4],
            endpoints: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookSection {
    pub phase_shift: f64,
    pub per_level: Option<Vec<f64>>,
}

impl Default for CodebookSection {
    fn default() -> Self {
        Self {
            phase_shift: DEFAULT_PHASE_SHIFT,
            per_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub sigma_beta: f64,
    pub angle_prior: AnglePrior,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            sigma_beta: 1.0,
            angle_prior: AnglePrior::UniformSine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub max_speed_kmh: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self {
            carrier_hz: 240e9,
            subcarrier_spacing_hz: 120e3,
            max_speed_kmh: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub transmit_snr_db: Vec<f64>,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    /// Matched-filter processing gain in samples. Defaults to one slot
    /// sampled at the Nyquist rate, `floor(B / subcarrier_spacing)`.
    pub matched_filter_length: Option<u64>,
    /// Minimum SNR for a hop to be out of outage.
    pub snr_threshold_db: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            transmit_snr_db: vec![20.0, 30.0, 40.0, 50.0, 60.0],
            noise_psd_dbm_hz: -204.0,
            bandwidth_hz: 4e9,
            path_loss_exponent: 2.02,
            reference_distance_m: 1.0,
            matched_filter_length: None,
            snr_threshold_db: -50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub p_fa: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self { p_fa: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningSection {
    pub epsilon0: f64,
    pub trials: usize,
    pub runs: usize,
    /// Channel draws per arm for the brute-force arm oracle.
    pub oracle_samples: usize,
}

impl Default for LearningSection {
    fn default() -> Self {
        Self {
            epsilon0: 1.0,
            trials: 2000,
            runs: 200,
            oracle_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Evaluation blocks per (transmit SNR, policy) point.
    pub blocks: usize,
    /// Independent dynamic learners per point; evaluation blocks are split
    /// evenly between them after each finishes its learning trials.
    pub learners: usize,
    pub policies: Vec<Policy>,
    /// Transmit SNR at which reward CDFs are reported.
    pub cdf_snr_db: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            blocks: 10_000,
            learners: 50,
            policies: Policy::ALL.to_vec(),
            cdf_snr_db: Some(50.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Policy used by single-policy drivers (`learn`).
    pub policy: Policy,
    pub topology: TopologySection,
    pub array: ArrayConfig,
    pub codebook: CodebookSection,
    pub channel: ChannelSection,
    pub frame: FrameSection,
    pub budget: BudgetSection,
    pub detector: DetectorSection,
    pub learning: LearningSection,
    pub sweep: SweepSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            policy: Policy::Dynamic,
            topology: TopologySection::default(),
            array: ArrayConfig::default(),
            codebook: CodebookSection::default(),
            channel: ChannelSection::default(),
            frame: FrameSection::default(),
            budget: BudgetSection::default(),
            detector: DetectorSection::default(),
            learning: LearningSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// Matched-filter length of the calibrated scenario (about 93.3 dB).
pub const CALIBRATED_MATCHED_FILTER_LENGTH: u64 = 1 << 31;

impl ScenarioConfig {
    /// Default scenario with the processing gain raised so the transmit-SNR
    /// range spans the regime where reduced training pays off.
    pub fn calibrated() -> Self {
        let mut cfg = Self::default();
        cfg.budget.matched_filter_length = Some(CALIBRATED_MATCHED_FILTER_LENGTH);
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn ue_count(&self) -> usize {
        self.topology.distances_m.len() + 1
    }

    pub fn matched_filter_length(&self) -> u64 {
        self.budget
            .matched_filter_length
            .unwrap_or_else(|| (self.budget.bandwidth_hz / self.frame.subcarrier_spacing_hz).floor() as u64)
    }

    pub fn topology(&self) -> Result<MultiHopTopology> {
        let k = self.ue_count();
        if self.topology.branching.len() != k {
            return Err(Error::Config(format!(
                "{} hop distances imply {k} UEs but {} branching factors were given",
                self.topology.distances_m.len(),
                self.topology.branching.len()
            )));
        }
        MultiHopTopology::new(
            self.topology.branching.clone(),
            self.topology.distances_m.clone(),
            self.array.num_antennas,
            self.topology.endpoints.unwrap_or((1, k)),
        )
    }

    pub fn frame(&self) -> Result<FrameConfig> {
        FrameConfig::from_mobility(
            kmh_to_mps(self.frame.max_speed_kmh),
            self.frame.carrier_hz,
            self.frame.subcarrier_spacing_hz,
        )
    }

    pub fn detector(&self) -> Result<DetectorConfig> {
        DetectorConfig::new(self.detector.p_fa)
    }

    /// Link budget of 0-based hop `k` at one transmit SNR.
    pub fn link_budget(&self, hop: usize, transmit_snr_db: f64) -> LinkBudget {
        LinkBudget {
            distance_m: self.topology.distances_m[hop],
            carrier_hz: self.frame.carrier_hz,
            path_loss_exponent: self.budget.path_loss_exponent,
            reference_distance_m: self.budget.reference_distance_m,
            bandwidth_hz: self.budget.bandwidth_hz,
            noise_psd_dbm_hz: self.budget.noise_psd_dbm_hz,
            transmit_snr_db,
            matched_filter_length: self.matched_filter_length(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.topology()?;
        self.frame()?;
        self.detector()?;
        if !(self.channel.sigma_beta > 0.0) {
            return Err(Error::Config("sigma_beta must be positive".into()));
        }
        if self.budget.transmit_snr_db.is_empty() {
            return Err(Error::Config("at least one transmit SNR is required".into()));
        }
        if self.matched_filter_length() < 1 {
            return Err(Error::Config("matched filter length must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.learning.epsilon0) {
            return Err(Error::Config("epsilon0 must be in [0, 1]".into()));
        }
        if self.learning.runs == 0 || self.learning.oracle_samples == 0 {
            return Err(Error::Config("runs and oracle_samples must be >= 1".into()));
        }
        if self.sweep.policies.is_empty() || self.sweep.blocks == 0 {
            return Err(Error::Config(
                "a sweep needs at least one policy and block".into(),
            ));
        }
        if self.sweep.policies.contains(&Policy::Dynamic) && self.sweep.learners == 0 {
            return Err(Error::Config(
                "the dynamic policy needs at least one learner".into(),
            ));
        }
        if let Some(levels) = &self.codebook.per_level {
            for &s in &self.topology.branching {
                if exact_log(self.array.num_antennas, s) != Some(levels.len()) {
                    return Err(Error::Config(format!(
                        "{} per-level phase shifts do not match branching factor {s}",
                        levels.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolves everything needed to simulate one transmit-SNR point.
    pub fn scenario(&self, transmit_snr_db: f64) -> Result<Scenario> {
        self.validate()?;
        let topology = self.topology()?;
        let frame = self.frame()?;
        let arms = enumerate_arms(&topology, frame.slots_per_frame)?;
        let codebooks = self
            .topology
            .branching
            .iter()
            .map(|&s| {
                let depth = exact_log(self.array.num_antennas, s).unwrap_or(0);
                let shifts = self
                    .codebook
                    .per_level
                    .clone()
                    .unwrap_or_else(|| vec![self.codebook.phase_shift; depth]);
                build_codebook_per_level(&self.array, s, &shifts)
            })
            .collect::<Result<Vec<_>>>()?;
        let models = topology
            .hops()
            .map(|k| MeasurementModel::from_budget(&self.link_budget(k, transmit_snr_db)))
            .collect();
        Ok(Scenario {
            transmit_snr_db,
            topology,
            frame,
            arms,
            codebooks,
            models,
            detector: self.detector()?,
            sigma_beta: self.channel.sigma_beta,
            angle_prior: self.channel.angle_prior,
            snr_threshold: db_to_linear(self.budget.snr_threshold_db),
        })
    }
}

/// A fully resolved simulation setup at one transmit SNR.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub transmit_snr_db: f64,
    pub topology: MultiHopTopology,
    pub frame: FrameConfig,
    pub arms: Vec<Arm>,
    /// One codebook per UE.
    pub codebooks: Vec<MultiResCodebook>,
    /// One measurement model per served hop.
    pub models: Vec<MeasurementModel>,
    pub detector: DetectorConfig,
    pub sigma_beta: f64,
    pub angle_prior: AnglePrior,
    /// Linear outage threshold.
    pub snr_threshold: f64,
}

impl Scenario {
    pub fn frame_slots(&self) -> usize {
        self.frame.slots_per_frame
    }

    /// Index of the full-training arm.
    pub fn fixed_arm(&self) -> Option<usize> {
        self.arms.iter().position(Arm::is_full_training)
    }

    /// Same scenario with measurement noise removed.
    pub fn noiseless(mut self) -> Self {
        for m in &mut self.models {
            *m = m.noiseless();
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.matched_filter_length(), 33_333);
        let scn = cfg.scenario(40.0).unwrap();
        assert_eq!(scn.frame_slots(), 108);
        assert_eq!(scn.arms.len(), 9);
        assert_eq!(scn.codebooks.len(), 3);
        assert_eq!(scn.models.len(), 2);
        assert_eq!(scn.fixed_arm(), Some(0));
        assert!((scn.snr_threshold - 1e-5).abs() < 1e-20);
        // The 5 m hop loses 2.02 * 10 * log10(6) dB less than the 30 m hop.
        let ratio = scn.models[1].signal_scale / scn.models[0].signal_scale;
        assert!((10.0 * ratio.log10() - 20.2 * 6f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let cfg = ScenarioConfig::calibrated();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);

        let partial = ScenarioConfig::from_toml_str("seed = 9\n[learning]\nruns = 3\n").unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.learning.runs, 3);
        assert_eq!(partial.learning.trials, 2000);
        assert_eq!(partial.array.num_antennas, 64);
    }

    #[test]
    fn invalid_files_are_rejected() {
        assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("[topology]\nbranching = [4, 4]").is_err());
        assert!(ScenarioConfig::from_toml_str("[array]\nnum_antennas = 48").is_err());
        assert!(ScenarioConfig::from_toml_str("[detector]\np_fa = 0.0").is_err());
        assert!(ScenarioConfig::from_toml_str("[codebook]\nper_level = [1.0, 2.0]").is_err());
        assert!(ScenarioConfig::from_toml_str("[codebook]\nper_level = [1.0, 2.0, 3.0]").is_ok());
    }
}
