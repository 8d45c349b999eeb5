//! Counter-based random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (Bernstein's ChaCha
//! stream cipher reduced to 8 rounds, as implemented by `rand_chacha`'s
//! `ChaCha8Rng`). A generator is keyed by the 64-bit `seed` written
//! little-endian into the first 8 key bytes (remaining 24 bytes zero) and
//! positioned on the 64-bit ChaCha `stream` (nonce). Block counters start at
//! zero. Derived streams are computed with the SplitMix64 finalizer, so the
//! whole tree of streams is a pure function of `(seed, stream)`.
//!
//! Distribution sampling is implemented here rather than delegated, so the
//! mapping from raw words to values is pinned as well:
//!
//! * `uniform()`      — top 53 bits of one word, scaled by 2⁻⁵³, in `[0, 1)`.
//! * `below(n)`       — Lemire's multiply-and-reject on one 64-bit word.
//! * `normal()`       — Box–Muller, cosine branch only, two uniforms per draw.
//! * `gamma(α)`       — Marsaglia–Tsang; α < 1 via the `U^(1/α)` boost.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one random stream: a seed plus a consumer id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream keyed by `key` (image index, episode index, ...).
    pub fn fork(&self, key: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix64(self.stream ^ mix64(key.wrapping_add(GOLDEN))),
        }
    }

    /// Sibling stream `k` positions after this one; `offset(0)` is `self`.
    pub fn offset(&self, k: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(k),
        }
    }

    pub fn generator(&self) -> Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(self.stream);
        Rng { inner }
    }
}

/// A positioned generator. Create one with [`RngState::generator`].
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = (self.next_u64() as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = (self.next_u64() as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi);
        lo + self.below(u64::from(hi - lo) + 1) as u32
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn gamma(&mut self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0);
        if alpha < 1.0 {
            let boost = self.uniform().max(f64::MIN_POSITIVE).powf(1.0 / alpha);
            return self.gamma(alpha + 1.0) * boost;
        }
        let d = alpha - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let (x, v) = loop {
                let x = self.normal();
                let v = 1.0 + c * x;
                if v > 0.0 {
                    break (x, v * v * v);
                }
            };
            let u = self.uniform();
            if u < 1.0 - 0.0331 * x * x * x * x || u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Weights drawn from a symmetric Dirichlet(α) of dimension `k`.
    pub fn dirichlet(&mut self, k: usize, alpha: f64) -> Vec<f64> {
        if k == 1 {
            return vec![1.0];
        }
        let mut w: Vec<f64> = (0..k).map(|_| self.gamma(alpha)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|x| *x /= total);
        } else {
            w.iter_mut().for_each(|x| *x = 1.0 / k as f64);
        }
        w
    }

    /// Fisher–Yates, drawing from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
