//! BPSK over AWGN with reproducible, seekable noise.
//!
//! The all-zero codeword is always transmitted (every symbol is `+1`), which
//! is exact for linear codes on this symmetric channel.
//!
//! Noise comes from ChaCha8 keyed by the run seed, with one ChaCha stream
//! per lane. Sample `k` of a lane is built by Box-Muller from the two 64-bit
//! words at word position `4 * (k / 2)`, taking the cosine branch for even
//! `k` and the sine branch for odd `k`. Every sample is therefore a pure
//! function of `(seed, lane stream, position)`, independent of how many
//! threads produced the neighbouring samples.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Noise standard deviation for unit-energy BPSK at the given `E_b/N_0`.
///
/// With `E_s = 1` and `E_b = E_s / R`, `σ² = N_0/2 = 1 / (2 R 10^(dB/10))`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("code rate must be in (0, 1], got {rate}")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub rate: f64,
    pub seed: u64,
    pub gamma: usize,
}

impl ChannelConfig {
    pub fn sigma(&self) -> Result<f64> {
        if self.gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        ebn0_to_sigma(self.ebn0_db, self.rate)
    }
}

/// Standard-normal source addressed by `(stream, position)`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fills `out` with samples `start..start + out.len()` of `stream`.
    pub fn fill_normal(&mut self, stream: u64, start: u64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        self.rng.set_stream(stream);
        self.rng.set_word_pos(u128::from(start / 2) * 4);
        let mut pos = start;
        let mut i = 0;
        while i < out.len() {
            let (c, s) = self.pair();
            if pos.is_multiple_of(2) {
                out[i] = c;
                i += 1;
                pos += 1;
                if i == out.len() {
                    break;
                }
            }
            out[i] = s;
            i += 1;
            pos += 1;
        }
    }

    pub fn normal(&mut self, stream: u64, position: u64) -> f64 {
        let mut v = [0.0];
        self.fill_normal(stream, position, &mut v);
        v[0]
    }

    fn pair(&mut self) -> (f64, f64) {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (self.rng.next_u64() >> 11) as f64 * SCALE;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

/// Received values for `cfg.gamma` all-zero codewords of length `n`.
///
/// Lane `lane` of batch `batch` reads noise stream `batch * gamma + lane`
/// from position 0; the result is lane-major.
pub fn simulate_block(cfg: &ChannelConfig, n: usize, batch: u64) -> Result<Vec<f64>> {
    let sigma = cfg.sigma()?;
    let mut out = vec![0.0; cfg.gamma * n];
    fill_received(&mut NoiseSource::new(cfg.seed), sigma, batch * cfg.gamma as u64, 0, n, &mut out);
    Ok(out)
}

/// Writes `1 + σ g` for consecutive lane streams starting at `first_stream`,
/// `n` samples per lane taken from position `start`.
pub fn fill_received(noise: &mut NoiseSource, sigma: f64, first_stream: u64, start: u64, n: usize, out: &mut [f64]) {
    for (lane, chunk) in out.chunks_mut(n.max(1)).enumerate() {
        noise.fill_normal(first_stream + lane as u64, start, chunk);
        for v in chunk.iter_mut() {
            *v = 1.0 + sigma * *v;
        }
    }
}
