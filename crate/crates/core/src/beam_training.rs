//! Hierarchical beam training for one hop, truncated at a commanded level.
//!
//! The transmitter searches first while the receiver listens on a single
//! element; then the receiver searches while the transmitter holds its
//! selected codeword. Each candidate costs one slot. Feedback of the winning
//! index is free and error-free.
//!
//! Measurements are normalized so the matched-filter output noise has unit
//! variance; all signal scaling lives in [`MeasurementModel::signal_scale`].

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array_channel::{
    check_unit_norm, complex_gaussian, ChannelRealization, LinkBudget, RankOneChannel,
};
use crate::codebook::{argmax_first, children_unchecked, BeamIndex, MultiResCodebook};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Probability of false alarm, in `(0, 1]`.
    pub p_fa: f64,
    /// Noise variance at the matched-filter output.
    pub noise_variance: f64,
}

impl DetectorConfig {
    pub fn new(p_fa: f64) -> Result<Self> {
        let det = Self {
            p_fa,
            noise_variance: 1.0,
        };
        det.validate()?;
        Ok(det)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_fa > 0.0 && self.p_fa <= 1.0) {
            return Err(Error::Config(format!(
                "false-alarm probability must be in (0, 1], got {}",
                self.p_fa
            )));
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::Config("detector noise variance must be positive".into()));
        }
        Ok(())
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            p_fa: 0.01,
            noise_variance: 1.0,
        }
    }
}

/// Neyman-Pearson threshold on `|y|^2`.
///
/// Under noise only `|y|^2` is exponential with mean `sigma^2`, so
/// `P(|y|^2 > eta) = exp(-eta / sigma^2)` and `eta = -sigma^2 ln(p_fa)`.
pub fn np_threshold(det: &DetectorConfig) -> f64 {
    // -0.0 for p_fa = 1
    (-det.noise_variance * det.p_fa.ln()).max(0.0)
}

/// Signal amplitude scaling and noise level of one training measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    /// Linear SNR per unit beamforming gain (path loss and matched filter folded in).
    pub signal_scale: f64,
    pub noise_variance: f64,
}

impl MeasurementModel {
    pub fn from_budget(budget: &LinkBudget) -> Self {
        Self {
            signal_scale: budget.snr_scale(),
            noise_variance: 1.0,
        }
    }

    pub fn noiseless(self) -> Self {
        Self {
            noise_variance: 0.0,
            ..self
        }
    }
}

/// One noisy training observation `sqrt(p) v^H H w + n`.
pub fn measure<R: Rng + ?Sized>(
    beamformer: &[Complex64],
    combiner: &[Complex64],
    channel: &RankOneChannel,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<Complex64> {
    check_unit_norm("beamformer", beamformer)?;
    check_unit_norm("combiner", combiner)?;
    Ok(measure_unchecked(beamformer, combiner, channel, model, rng))
}

fn measure_unchecked<R: Rng + ?Sized>(
    beamformer: &[Complex64],
    combiner: &[Complex64],
    channel: &RankOneChannel,
    model: &MeasurementModel,
    rng: &mut R,
) -> Complex64 {
    let signal = model.signal_scale.sqrt() * channel.response(combiner, beamformer);
    if model.noise_variance > 0.0 {
        signal + complex_gaussian(model.noise_variance, rng)
    } else {
        signal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Tx,
    Rx,
}

/// One candidate measurement, for per-level traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub phase: Phase,
    pub level: usize,
    pub candidate: usize,
    pub power: f64,
    pub winner: bool,
    pub detected: bool,
}

pub fn write_trace_csv<W: Write>(entries: &[TraceEntry], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for e in entries {
        out.serialize(e)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingOutcome {
    pub tx_beam: BeamIndex,
    pub rx_beam: BeamIndex,
    /// Post-training SNR with the selected pair (linear).
    pub snr: f64,
    pub slots_used: usize,
    pub miss_detected: bool,
    pub levels_used: usize,
}

/// Trains one hop down to `levels` on both ends.
pub fn train_hop<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    book_tx: &MultiResCodebook,
    book_rx: &MultiResCodebook,
    levels: usize,
    model: &MeasurementModel,
    det: &DetectorConfig,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    train_hop_traced(channel, book_tx, book_rx, levels, model, det, rng, None)
}

#[allow(clippy::too_many_arguments)]
pub fn train_hop_traced<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    book_tx: &MultiResCodebook,
    book_rx: &MultiResCodebook,
    levels: usize,
    model: &MeasurementModel,
    det: &DetectorConfig,
    rng: &mut R,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<TrainingOutcome> {
    let max = book_tx.depth().min(book_rx.depth());
    if levels < 1 || levels > max {
        return Err(Error::OutOfRange(format!(
            "training level {levels} not in 1..={max}"
        )));
    }
    let ch = channel.responses(book_tx.array(), book_rx.array());
    let threshold = np_threshold(det);

    let omni = single_element(book_rx.array().num_antennas);
    let (tx_beam, tx_miss) = descend(
        book_tx,
        levels,
        Phase::Tx,
        threshold,
        |w| measure_unchecked(w, &omni, &ch, model, rng).norm_sqr(),
        trace.as_deref_mut(),
    );

    let w = book_tx.codeword_unchecked(tx_beam);
    let (rx_beam, rx_miss) = descend(
        book_rx,
        levels,
        Phase::Rx,
        threshold,
        |v| measure_unchecked(w, v, &ch, model, rng).norm_sqr(),
        trace,
    );

    let gain = ch.response(book_rx.codeword_unchecked(rx_beam), w).norm_sqr();
    Ok(TrainingOutcome {
        tx_beam,
        rx_beam,
        snr: model.signal_scale * gain,
        slots_used: (book_tx.branching() + book_rx.branching()) * levels,
        miss_detected: tx_miss || rx_miss,
        levels_used: levels,
    })
}

fn single_element(n: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[0] = Complex64::new(1.0, 0.0);
    e
}

/// Walks the tree for `levels` levels, measuring each candidate once.
/// Returns the final node and whether any level's winner went undetected.
fn descend<F>(
    book: &MultiResCodebook,
    levels: usize,
    phase: Phase,
    threshold: f64,
    mut power_of: F,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> (BeamIndex, bool)
where
    F: FnMut(&[Complex64]) -> f64,
{
    let mut candidates = book.roots();
    let mut selected = candidates[0];
    let mut missed = false;
    let mut powers = Vec::with_capacity(book.branching());
    for level in 1..=levels {
        if level > 1 {
            candidates = children_unchecked(selected, book.branching());
        }
        powers.clear();
        powers.extend(candidates.iter().map(|&c| power_of(book.codeword_unchecked(c))));
        let win = argmax_first(&powers);
        selected = candidates[win];
        missed |= powers[win] <= threshold;
        if let Some(t) = trace.as_deref_mut() {
            t.extend(
                candidates
                    .iter()
                    .zip(&powers)
                    .enumerate()
                    .map(|(j, (c, &p))| TraceEntry {
                        phase,
                        level,
                        candidate: c.index,
                        power: p,
                        winner: j == win,
                        detected: p > threshold,
                    }),
            );
        }
    }
    (selected, missed)
}
