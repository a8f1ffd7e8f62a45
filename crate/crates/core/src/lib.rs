//! Multi-resolution beam training for multi-hop sub-THz links, with an
//! epsilon-decay bandit that picks how deep each hop trains.
//!
//! Modules follow the signal chain: [`array_channel`] (steering vectors,
//! rank-1 channels, link budget), [`codebook`] (hierarchical DFT codebooks),
//! [`beam_training`] (noisy tree search with threshold detection),
//! [`multihop_rate`] (frame timing, overhead and end-to-end rate),
//! [`bandit`] (arms and policies) and [`sim`] (scenarios and experiments).

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array_channel;
pub mod bandit;
pub mod beam_training;
pub mod codebook;
pub mod error;
pub mod multihop_rate;
pub mod sim;

pub use array_channel::{
    beamformed_gain, received_snr, sample_channel, steering_vector, AnglePrior, ArrayConfig,
    ChannelRealization, LinkBudget,
};
pub use bandit::{enumerate_arms, Agent, Arm, BanditState, Policy};
pub use beam_training::{train_hop, DetectorConfig, MeasurementModel, TrainingOutcome};
pub use codebook::{build_codebook, BeamIndex, MultiResCodebook};
pub use error::{Error, Result};
pub use multihop_rate::{
    is_feasible, multihop_rate, single_hop_rate, FrameConfig, LevelVector, MultiHopTopology, Outage,
};
