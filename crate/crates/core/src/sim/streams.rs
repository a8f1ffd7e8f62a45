//! Derivation of independent random streams from one master seed.
//!
//! Every stream is a ChaCha8 generator seeded with
//! `mix(mix(mix(seed ^ purpose) ^ a) ^ b)`, where `mix` is the SplitMix64
//! finalizer. `purpose` names the consumer (oracle, learning, sweep, ...),
//! `a` is usually a run index and `b` a trial or block index. Streams that
//! omit the transmit-SNR point or policy on purpose give common random
//! numbers across those axes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Oracle = 1,
    LearningEnv = 2,
    LearningAgent = 3,
    SweepBlock = 4,
    SweepAgent = 5,
    SweepLearningEnv = 6,
    RandomArm = 7,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, purpose: Purpose, a: u64, b: u64) -> u64 {
    mix(mix(mix(seed ^ ((purpose as u64) << 56)) ^ a) ^ b)
}

pub fn stream(seed: u64, purpose: Purpose, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, purpose, a, b))
}
