//! Uniform linear arrays, single-path channels and the link budget.
//!
//! Angles are carried as sine-angles `theta = sin(psi)` in `[-1, 1]`, which is
//! the coordinate the DFT codebook tiles uniformly. A hop's MIMO channel is the
//! rank-1 matrix `H = beta * a(theta_rx) * a(theta_tx)^H`; it is never
//! materialized; every gain is computed through the two array responses.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounded speed of light used throughout (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub num_antennas: usize,
    /// Element spacing over wavelength, `d / lambda`.
    pub spacing_ratio: f64,
}

impl ArrayConfig {
    pub fn new(num_antennas: usize, spacing_ratio: f64) -> Result<Self> {
        let cfg = Self {
            num_antennas,
            spacing_ratio,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas < 2 {
            return Err(Error::Config(format!(
                "array needs at least 2 antennas, got {}",
                self.num_antennas
            )));
        }
        if !(self.spacing_ratio > 0.0) {
            return Err(Error::Config(format!(
                "antenna spacing ratio must be positive, got {}",
                self.spacing_ratio
            )));
        }
        Ok(())
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            num_antennas: 64,
            spacing_ratio: 0.5,
        }
    }
}

/// Array response `a(theta)`; element `k` is `exp(-j 2 pi (d/lambda) k theta)`.
pub fn steering_vector(theta: f64, cfg: &ArrayConfig) -> Result<Vec<Complex64>> {
    check_sine_angle(theta)?;
    Ok(steering_vector_unchecked(theta, cfg))
}

pub(crate) fn steering_vector_unchecked(theta: f64, cfg: &ArrayConfig) -> Vec<Complex64> {
    let phase_step = -2.0 * PI * cfg.spacing_ratio * theta;
    (0..cfg.num_antennas)
        .map(|k| Complex64::from_polar(1.0, phase_step * k as f64))
        .collect()
}

fn check_sine_angle(theta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!(
            "sine-angle must lie in [-1, 1], got {theta}"
        )));
    }
    Ok(())
}

/// Hermitian inner product `x^H y`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Prior over the departure/arrival sine-angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnglePrior {
    /// `theta` uniform on `[-1, 1]`.
    #[default]
    UniformSine,
    /// Physical azimuth `psi` uniform on `[-pi/2, pi/2]`, `theta = sin(psi)`.
    UniformAzimuth,
}

impl AnglePrior {
    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            AnglePrior::UniformSine => rng.random_range(-1.0..=1.0),
            AnglePrior::UniformAzimuth => rng.random_range(-PI / 2.0..=PI / 2.0).sin(),
        }
    }
}

/// One hop's dominant path: departure angle, arrival angle and complex gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub aod: f64,
    pub aoa: f64,
    pub gain: Complex64,
}

impl ChannelRealization {
    pub fn new(aod: f64, aoa: f64, gain: Complex64) -> Result<Self> {
        check_sine_angle(aod)?;
        check_sine_angle(aoa)?;
        Ok(Self { aod, aoa, gain })
    }

    /// Precomputes both array responses for repeated gain evaluation.
    pub fn responses(&self, tx: &ArrayConfig, rx: &ArrayConfig) -> RankOneChannel {
        RankOneChannel {
            gain: self.gain,
            tx_response: steering_vector_unchecked(self.aod, tx),
            rx_response: steering_vector_unchecked(self.aoa, rx),
        }
    }
}

/// Draws `beta ~ CN(0, sigma_beta^2)` and both angles uniformly in sine space.
pub fn sample_channel<R: Rng + ?Sized>(sigma_beta: f64, rng: &mut R) -> ChannelRealization {
    sample_channel_with(sigma_beta, AnglePrior::UniformSine, rng)
}

pub fn sample_channel_with<R: Rng + ?Sized>(
    sigma_beta: f64,
    prior: AnglePrior,
    rng: &mut R,
) -> ChannelRealization {
    let gain = complex_gaussian(sigma_beta * sigma_beta, rng);
    let aod = prior.sample(rng);
    let aoa = prior.sample(rng);
    ChannelRealization { aod, aoa, gain }
}

/// Circularly-symmetric complex Gaussian sample with the given total variance.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

/// A channel realization with its array responses evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneChannel {
    pub gain: Complex64,
    pub tx_response: Vec<Complex64>,
    pub rx_response: Vec<Complex64>,
}

impl RankOneChannel {
    /// `v^H H w` through the rank-1 factorization.
    pub fn response(&self, combiner: &[Complex64], beamformer: &[Complex64]) -> Complex64 {
        self.gain * inner(combiner, &self.rx_response) * inner(&self.tx_response, beamformer)
    }
}

/// `|v^H H w|^2` for unit-norm `v` and `w`.
pub fn beamformed_gain(
    combiner: &[Complex64],
    channel: &RankOneChannel,
    beamformer: &[Complex64],
) -> Result<f64> {
    check_unit_norm("combiner", combiner)?;
    check_unit_norm("beamformer", beamformer)?;
    if combiner.len() != channel.rx_response.len() || beamformer.len() != channel.tx_response.len() {
        return Err(Error::Precondition(format!(
            "beam lengths ({}, {}) do not match the arrays ({}, {})",
            combiner.len(),
            beamformer.len(),
            channel.rx_response.len(),
            channel.tx_response.len()
        )));
    }
    Ok(channel.response(combiner, beamformer).norm_sqr())
}

pub(crate) fn check_unit_norm(what: &str, x: &[Complex64]) -> Result<()> {
    let n = norm(x);
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Precondition(format!("{what} norm is {n}, expected 1")));
    }
    Ok(())
}

/// Per-hop link budget.
///
/// `transmit_snr_db` is the transmit power over the noise power before any
/// path loss. The received SNR for a beam pair with gain `g` is
/// `10^((transmit_snr_db - PL(d)) / 10) * g * matched_filter_length`, with
/// `PL(d) = FSPL(d0) + 10 n log10(d / d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub transmit_snr_db: f64,
    pub matched_filter_length: u64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) || !(self.reference_distance_m > 0.0) {
            return Err(Error::Config("distances must be positive".into()));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::Config("carrier frequency must be positive".into()));
        }
        if self.matched_filter_length < 1 {
            return Err(Error::Config("matched filter length must be >= 1".into()));
        }
        Ok(())
    }

    /// Free-space loss at the reference distance, in dB.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * PI * self.reference_distance_m * self.carrier_hz / SPEED_OF_LIGHT).log10()
    }

    pub fn path_loss_db(&self) -> f64 {
        self.reference_loss_db()
            + 10.0 * self.path_loss_exponent * (self.distance_m / self.reference_distance_m).log10()
    }

    /// Noise power over the full bandwidth, in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    /// Linear SNR per unit beamforming gain at the matched-filter output.
    pub fn snr_scale(&self) -> f64 {
        db_to_linear(self.transmit_snr_db - self.path_loss_db()) * self.matched_filter_length as f64
    }
}

pub fn received_snr(budget: &LinkBudget, gain: f64) -> f64 {
    budget.snr_scale() * gain
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
