//! Gaussian multiple-access channel: superposition, circularly-symmetric
//! noise, channel inversion under fading, and orthogonal per-node slots.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::codec::Constellation;

/// Channels weaker than this cannot be inverted.
pub const CHANNEL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("constellation has zero energy; SNR is undefined")]
    DegenerateConstellation,
    #[error("channel {index} has magnitude {magnitude:e}, below the inversion floor")]
    ZeroChannel { index: usize, magnitude: f64 },
    #[error("channel count {channels} does not match symbol count {symbols}")]
    LengthMismatch { symbols: usize, channels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    #[default]
    None,
    /// `h_k ~ CN(0, 1)`, compensated by `p_k = h_k^* / |h_k|^2`.
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: f64,
    /// Per-component noise standard deviation.
    pub sigma: f64,
    pub fading: Fading,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(
        constellation: &Constellation,
        snr_db: f64,
        fading: Fading,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        Ok(ChannelConfig {
            snr_db,
            sigma: sigma_from_snr(constellation, snr_db)?,
            fading,
            seed,
        })
    }
}

/// `sigma = sqrt(sum |x_i|^2 / (q 10^(snr/10)))`; `+inf` dB gives a noiseless
/// channel.
pub fn sigma_from_snr(constellation: &Constellation, snr_db: f64) -> Result<f64, ChannelError> {
    let total: f64 = constellation.points().map(|x| x.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(ChannelError::DegenerateConstellation);
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let q = constellation.order() as f64;
    Ok((total / (q * 10f64.powf(snr_db / 10.0))).sqrt())
}

pub fn snr_from_sigma(constellation: &Constellation, sigma: f64) -> f64 {
    let total: f64 = constellation.points().map(|x| x.norm_sqr()).sum();
    10.0 * (total / (constellation.order() as f64 * sigma * sigma)).log10()
}

/// The RNG for one Monte Carlo trial: stream `trial` of the generator keyed
/// by `seed`. Trials can run in any order or thread and see the same draws.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `sigma * (n1 + i n2)` with independent standard normals.
pub fn awgn<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Complex64 {
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * n1, sigma * n2)
}

/// Circularly-symmetric unit-variance channel coefficient.
pub fn rayleigh_channel<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    awgn(std::f64::consts::FRAC_1_SQRT_2, rng)
}

pub fn transmit_mac<R: Rng + ?Sized>(symbols: &[Complex64], sigma: f64, rng: &mut R) -> Complex64 {
    symbols.iter().sum::<Complex64>() + awgn(sigma, rng)
}

/// `sum h_k p_k x_k + z` with channel-inversion precoding `p_k = h_k^*/|h_k|^2`.
pub fn transmit_faded<R: Rng + ?Sized>(
    symbols: &[Complex64],
    channels: &[Complex64],
    sigma: f64,
    rng: &mut R,
) -> Result<Complex64, ChannelError> {
    if symbols.len() != channels.len() {
        return Err(ChannelError::LengthMismatch {
            symbols: symbols.len(),
            channels: channels.len(),
        });
    }
    let mut r = Complex64::new(0.0, 0.0);
    for (index, (&x, &h)) in symbols.iter().zip(channels).enumerate() {
        let magnitude = h.norm();
        if !(magnitude >= CHANNEL_FLOOR) {
            return Err(ChannelError::ZeroChannel { index, magnitude });
        }
        let p = h.conj() / h.norm_sqr();
        r += h * p * x;
    }
    Ok(r + awgn(sigma, rng))
}

/// Each node on its own subcarrier with independent noise of the same `sigma`.
pub fn transmit_ofdma<R: Rng + ?Sized>(symbols: &[Complex64], sigma: f64, rng: &mut R) -> Vec<Complex64> {
    symbols.iter().map(|&x| x + awgn(sigma, rng)).collect()
}
