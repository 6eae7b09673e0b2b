//! Seedable, platform-independent random source.
//!
//! Backed by ChaCha8 seeded through `seed_from_u64`. Float and Gaussian draws are
//! computed here rather than through `rand`'s distribution types so the streams
//! stay fixed across dependency upgrades.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SceneRng {
    inner: ChaCha8Rng,
}

impl SceneRng {
    pub fn seed_from_u64(seed: u64) -> SceneRng {
        SceneRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Independent child stream, e.g. one per simulated agent.
    pub fn fork(&mut self) -> SceneRng {
        SceneRng::seed_from_u64(self.next_u64())
    }

    /// Uniform in [0, 1).
    pub fn unit_open(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, 1], both endpoints reachable.
    pub fn unit_closed(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / ((1u64 << 53) - 1) as f64
    }

    /// Continuous uniform on [low, high].
    pub fn range(&mut self, low: f64, high: f64) -> f64 {
        if low == high {
            return low;
        }
        let u = self.unit_closed();
        (low + (high - low) * u).clamp(low, high)
    }

    /// Standard Box-Muller transform, one draw per call.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit_open();
        let u2 = self.unit_open();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normal(&mut self, mean: f64, stddev: f64) -> f64 {
        mean + stddev * self.standard_normal()
    }

    /// Uniform index in `0..n` (n > 0).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
