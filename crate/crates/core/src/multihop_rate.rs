//! Frame sizing, training overhead and decode-and-forward spectral efficiency.

use serde::{Deserialize, Serialize};

use crate::array_channel::SPEED_OF_LIGHT;
use crate::codebook::exact_log;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    /// Slots per frame, `L`.
    pub slots_per_frame: usize,
    pub slot_duration_s: f64,
    pub coherence_time_s: f64,
    pub subcarrier_spacing_hz: f64,
    pub max_speed_mps: f64,
    pub carrier_hz: f64,
}

impl FrameConfig {
    /// Sizes the frame to one coherence interval `T_c = c / (v f_c)` with
    /// slot duration `1 / subcarrier_spacing`.
    pub fn from_mobility(max_speed_mps: f64, carrier_hz: f64, subcarrier_spacing_hz: f64) -> Result<Self> {
        if !(max_speed_mps > 0.0 && carrier_hz > 0.0 && subcarrier_spacing_hz > 0.0) {
            return Err(Error::Config(
                "speed, carrier and subcarrier spacing must be positive".into(),
            ));
        }
        let cfg = Self {
            slots_per_frame: frame_slots(max_speed_mps, carrier_hz, subcarrier_spacing_hz),
            slot_duration_s: 1.0 / subcarrier_spacing_hz,
            coherence_time_s: coherence_time(max_speed_mps, carrier_hz),
            subcarrier_spacing_hz,
            max_speed_mps,
            carrier_hz,
        };
        if cfg.slots_per_frame < 1 {
            return Err(Error::Config(format!(
                "coherence time {:.3e} s is shorter than one slot",
                cfg.coherence_time_s
            )));
        }
        Ok(cfg)
    }
}

/// Inverse maximum Doppler shift.
pub fn coherence_time(max_speed_mps: f64, carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / (max_speed_mps * carrier_hz)
}

/// `floor(T_c / tau)`.
pub fn frame_slots(max_speed_mps: f64, carrier_hz: f64, subcarrier_spacing_hz: f64) -> usize {
    let ratio = SPEED_OF_LIGHT * subcarrier_spacing_hz / (max_speed_mps * carrier_hz);
    if !ratio.is_finite() {
        return 0;
    }
    // Exact integers such as 108 must not round down to 107.
    (ratio * (1.0 + 1e-12)).floor() as usize
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// A linear chain of `K` UEs and the sub-path `i -> j` being served.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiHopTopology {
    /// Training signals per level at each UE, `s_k`, length `K`.
    pub branching: Vec<usize>,
    /// Hop lengths in metres, length `K - 1`.
    pub distances_m: Vec<f64>,
    /// 1-based endpoints `i < j`.
    pub endpoints: (usize, usize),
    /// Levels of a full search at each UE, `M_k = log_{s_k} N`.
    depths: Vec<usize>,
}

impl MultiHopTopology {
    pub fn new(
        branching: Vec<usize>,
        distances_m: Vec<f64>,
        num_antennas: usize,
        endpoints: (usize, usize),
    ) -> Result<Self> {
        let k = branching.len();
        if k < 2 {
            return Err(Error::Config("a link needs at least two UEs".into()));
        }
        if distances_m.len() != k - 1 {
            return Err(Error::Config(format!(
                "{k} UEs need {} hop distances, got {}",
                k - 1,
                distances_m.len()
            )));
        }
        if distances_m.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("hop distances must be positive".into()));
        }
        let (i, j) = endpoints;
        if !(1 <= i && i < j && j <= k) {
            return Err(Error::Config(format!(
                "endpoints ({i}, {j}) must satisfy 1 <= i < j <= {k}"
            )));
        }
        let depths = branching
            .iter()
            .map(|&s| {
                exact_log(num_antennas, s)
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| Error::Config(format!("{num_antennas} antennas is not a power of {s}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            branching,
            distances_m,
            endpoints,
            depths,
        })
    }

    /// A chain with the same branching factor at every UE, served end to end.
    pub fn uniform(
        ue_count: usize,
        branching: usize,
        distances_m: Vec<f64>,
        num_antennas: usize,
    ) -> Result<Self> {
        Self::new(
            vec![branching; ue_count],
            distances_m,
            num_antennas,
            (1, ue_count),
        )
    }

    pub fn ue_count(&self) -> usize {
        self.branching.len()
    }

    /// Number of served hops, `j - i`.
    pub fn hop_count(&self) -> usize {
        self.endpoints.1 - self.endpoints.0
    }

    /// 0-based indices of the first UE of each served hop.
    pub fn hops(&self) -> impl Iterator<Item = usize> + '_ {
        self.endpoints.0 - 1..self.endpoints.1 - 1
    }

    pub fn ue_depth(&self, ue: usize) -> usize {
        self.depths[ue]
    }

    /// Deepest level both ends of served hop `h` (0-based within the path) support.
    pub fn hop_depth(&self, h: usize) -> usize {
        let k = self.endpoints.0 - 1 + h;
        self.depths[k].min(self.depths[k + 1])
    }

    /// Slots per training level on served hop `h`, `s_k + s_{k+1}`.
    pub fn hop_slots_per_level(&self, h: usize) -> usize {
        let k = self.endpoints.0 - 1 + h;
        self.branching[k] + self.branching[k + 1]
    }

    pub fn full_levels(&self) -> LevelVector {
        LevelVector((0..self.hop_count()).map(|h| self.hop_depth(h)).collect())
    }
}

/// Training depth `m_k` for each served hop.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelVector(pub Vec<usize>);

impl LevelVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

fn check_hops(topo: &MultiHopTopology, actual: usize) -> Result<()> {
    if actual != topo.hop_count() {
        return Err(Error::HopCountMismatch {
            expected: topo.hop_count(),
            actual,
        });
    }
    Ok(())
}

/// Total training slots `L'_{i,j} = sum_k (s_k + s_{k+1}) m_k`.
pub fn training_overhead(levels: &LevelVector, topo: &MultiHopTopology) -> Result<usize> {
    check_hops(topo, levels.0.len())?;
    Ok(levels
        .0
        .iter()
        .enumerate()
        .map(|(h, m)| topo.hop_slots_per_level(h) * m)
        .sum())
}

/// How the outage factor of the rate is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outage<'a> {
    /// Indicator of each hop's SNR reaching the threshold (linear).
    Instantaneous { threshold: f64 },
    /// Externally estimated per-hop success probabilities.
    Expected { success: &'a [f64] },
}

/// `[1 - P_out] (1 - L'/L) log2(1 + snr)`.
pub fn single_hop_rate(snr: f64, overhead: usize, frame_slots: usize, outage: Outage<'_>) -> Result<f64> {
    if overhead >= frame_slots {
        return Err(Error::Precondition(format!(
            "training overhead {overhead} must be below the frame length {frame_slots}"
        )));
    }
    let success = match outage {
        Outage::Instantaneous { threshold } => indicator(snr >= threshold),
        Outage::Expected { success } => {
            if success.len() != 1 {
                return Err(Error::HopCountMismatch {
                    expected: 1,
                    actual: success.len(),
                });
            }
            success[0]
        }
    };
    Ok(success * prelog(overhead, frame_slots) * (1.0 + snr).log2())
}

/// Decode-and-forward rate of the served path, limited by its weakest hop.
pub fn multihop_rate(
    snrs: &[f64],
    levels: &LevelVector,
    topo: &MultiHopTopology,
    frame_slots: usize,
    outage: Outage<'_>,
) -> Result<f64> {
    check_hops(topo, snrs.len())?;
    let overhead = training_overhead(levels, topo)?;
    if overhead >= frame_slots {
        return Err(Error::Precondition(format!(
            "training overhead {overhead} must be below the frame length {frame_slots}"
        )));
    }
    let success: f64 = match outage {
        Outage::Instantaneous { threshold } => snrs.iter().map(|&g| indicator(g >= threshold)).product(),
        Outage::Expected { success } => {
            check_hops(topo, success.len())?;
            success.iter().product()
        }
    };
    let bottleneck = snrs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(success * prelog(overhead, frame_slots) * (1.0 + bottleneck).log2() / snrs.len() as f64)
}

fn prelog(overhead: usize, frame_slots: usize) -> f64 {
    1.0 - overhead as f64 / frame_slots as f64
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Checks `1 <= m_k <= M_k` and `L' < floor(L / (K - 1)) (j - i)`.
pub fn is_feasible(levels: &LevelVector, topo: &MultiHopTopology, frame_slots: usize) -> bool {
    if levels.0.len() != topo.hop_count() {
        return false;
    }
    let in_range = levels
        .0
        .iter()
        .enumerate()
        .all(|(h, &m)| m >= 1 && m <= topo.hop_depth(h));
    if !in_range {
        return false;
    }
    let overhead = training_overhead(levels, topo).expect("hop count checked");
    overhead < (frame_slots / (topo.ue_count() - 1)) * topo.hop_count()
}
