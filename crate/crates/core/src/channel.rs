//! Uniform linear array beamforming, mean CSI, Rayleigh block fading and
//! received power.
//!
//! The array lies along the x axis. Bearings are measured from that axis, so
//! the steering phase depends on `cos(theta)` only and the pattern is mirror
//! symmetric about the axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{distance, Point};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaConfig {
    pub n_antennas: usize,
    /// Element spacing in meters.
    pub spacing: f64,
    /// Carrier frequency in hertz.
    pub carrier_frequency: f64,
}

impl Default for UlaConfig {
    fn default() -> Self {
        Self {
            n_antennas: 8,
            spacing: 0.1,
            carrier_frequency: 800e6,
        }
    }
}

impl UlaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::Config("array needs at least one antenna".into()));
        }
        if !(self.spacing > 0.0) || !(self.carrier_frequency > 0.0) {
            return Err(Error::Config(
                "antenna spacing and carrier frequency must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Inter-element phase increment for a direction with the given cosine.
    fn phase_step(&self, cos_bearing: f64) -> f64 {
        2.0 * PI * self.spacing / self.wavelength() * cos_bearing
    }
}

/// Unit-norm beamforming weights steering toward `beam_angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub weights: Vec<Complex64>,
    pub beam_angle: f64,
}

impl Codeword {
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| w.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    entries: Vec<Codeword>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&Codeword> {
        self.entries.get(k)
    }

    pub fn entries(&self) -> &[Codeword] {
        &self.entries
    }

    /// Index of the codeword whose steering cosine is nearest `cos_bearing`.
    pub fn nearest(&self, cos_bearing: f64) -> usize {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (k, c) in self.entries.iter().enumerate() {
            let gap = (c.beam_angle.cos() - cos_bearing).abs();
            if gap < best_gap {
                best = k;
                best_gap = gap;
            }
        }
        best
    }
}

/// `w_n = exp(-i 2 pi n (d / lambda) cos theta_m) / sqrt(N_a)`.
pub fn steering_codeword(theta_m: f64, ula: &UlaConfig) -> Codeword {
    let n = ula.n_antennas;
    let amp = 1.0 / (n as f64).sqrt();
    let step = ula.phase_step(theta_m.cos());
    Codeword {
        weights: (0..n)
            .map(|k| Complex64::from_polar(amp, -step * k as f64))
            .collect(),
        beam_angle: theta_m,
    }
}

/// `m_size` codewords at beam angles `k pi / m_size`.
pub fn build_codebook(m_size: usize, ula: &UlaConfig) -> Result<Codebook> {
    if m_size == 0 {
        return Err(Error::Config(
            "codebook must contain at least one codeword".into(),
        ));
    }
    ula.validate()?;
    Ok(Codebook {
        entries: (0..m_size)
            .map(|k| steering_codeword(k as f64 * PI / m_size as f64, ula))
            .collect(),
    })
}

/// Line-of-sight array response with per-element magnitude `amplitude`.
pub fn array_response(cos_bearing: f64, amplitude: f64, ula: &UlaConfig) -> Vec<Complex64> {
    let step = ula.phase_step(cos_bearing);
    (0..ula.n_antennas)
        .map(|k| Complex64::from_polar(amplitude, step * k as f64))
        .collect()
}

/// Expected CSI from a charger at `charger` to a sensor with antenna gain `gain`.
///
/// Every element has magnitude `gain / d`; phases follow the bearing.
pub fn mean_channel(
    sensor: Point,
    gain: f64,
    charger: Point,
    ula: &UlaConfig,
) -> Result<Vec<Complex64>> {
    let d = distance(sensor, charger);
    if d == 0.0 {
        return Err(Error::Geometry("sensor coincides with charger".into()));
    }
    Ok(array_response((sensor.x - charger.x) / d, gain / d, ula))
}

/// Power gain `|a(theta)^T w|^2` of a unit-amplitude array response.
pub fn array_factor(cos_bearing: f64, codeword: &Codeword, ula: &UlaConfig) -> f64 {
    let step = ula.phase_step(cos_bearing);
    codeword
        .weights
        .iter()
        .enumerate()
        .map(|(k, w)| Complex64::from_polar(1.0, step * k as f64) * w)
        .sum::<Complex64>()
        .norm_sqr()
}

/// One block-fading realization of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub mean_vector: Vec<Complex64>,
    pub fade: Complex64,
    pub realized: Vec<Complex64>,
}

/// Circularly symmetric complex Gaussian with unit second moment; `|g|^2 ~ Exp(1)`.
pub fn sample_fade<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Scales the whole mean vector by a single fade so the beam shape survives.
pub fn sample_csi<R: Rng + ?Sized>(mean: &[Complex64], rng: &mut R) -> ChannelDraw {
    let fade = sample_fade(rng);
    ChannelDraw {
        mean_vector: mean.to_vec(),
        fade,
        realized: mean.iter().map(|h| h * fade).collect(),
    }
}

fn inner(h: &[Complex64], w: &Codeword) -> Result<Complex64> {
    check_len(w.weights.len(), h.len())?;
    Ok(h.iter().zip(&w.weights).map(|(a, b)| a * b).sum())
}

/// `|h^T w|^2`.
pub fn received_power(h: &[Complex64], w: &Codeword) -> Result<f64> {
    Ok(inner(h, w)?.norm_sqr())
}

/// Power at a sensor reached by several chargers at once: the complex
/// amplitudes add before squaring.
pub fn superposed_power(contributions: &[(&[Complex64], &Codeword)]) -> Result<f64> {
    if contributions.is_empty() {
        return Err(Error::Argument("no charger contributions".into()));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (h, w) in contributions {
        total += inner(h, w)?;
    }
    Ok(total.norm_sqr())
}

/// Mean received power under the fade law. With a scalar unit-power fade this
/// is the deterministic power of the mean channel.
pub fn expected_power(
    sensor: Point,
    gain: f64,
    charger: Point,
    codeword: &Codeword,
    ula: &UlaConfig,
) -> Result<f64> {
    received_power(&mean_channel(sensor, gain, charger, ula)?, codeword)
}

/// Largest deterministic power in a scenario: `N_a A_max^2 / d_min^2`.
pub fn reference_power(n_antennas: usize, max_gain: f64, min_distance: f64) -> f64 {
    n_antennas as f64 * max_gain * max_gain / (min_distance * min_distance)
}

pub fn normalize_power(p: f64, p_ref: f64) -> Result<f64> {
    if !(p_ref > 0.0) {
        return Err(Error::Config(format!(
            "reference power {p_ref} must be positive"
        )));
    }
    Ok((p / p_ref).clamp(0.0, 1.0))
}

/// Per-sensor antenna gains under a bounded random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaGainState {
    pub initial: Vec<f64>,
    pub current: Vec<f64>,
    /// Step half-width as a fraction of each sensor's initial gain.
    pub drift_rate: f64,
}

/// Gains never fall below this fraction of their initial value.
pub const GAIN_FLOOR_FRACTION: f64 = 0.01;

impl AntennaGainState {
    pub fn new(initial: Vec<f64>, drift_rate: f64) -> Result<Self> {
        if initial.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Config("antenna gains must be positive".into()));
        }
        if !(drift_rate >= 0.0) {
            return Err(Error::Config(format!("negative drift rate {drift_rate}")));
        }
        Ok(Self {
            current: initial.clone(),
            initial,
            drift_rate,
        })
    }

    /// One random-walk step: `A_i += U(-r A_i0, r A_i0)`, floored.
    pub fn drift<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (a, &a0) in self.current.iter_mut().zip(&self.initial) {
            let u: f64 = rng.random();
            let step = self.drift_rate * a0 * (2.0 * u - 1.0);
            *a = (*a + step).max(GAIN_FLOOR_FRACTION * a0);
        }
    }
}

pub fn drift_antenna_gain<R: Rng + ?Sized>(
    state: &AntennaGainState,
    rng: &mut R,
) -> AntennaGainState {
    let mut next = state.clone();
    next.drift(rng);
    next
}
