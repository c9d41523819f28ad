//! Deterministic random-number substrate.
//!
//! MT19937 (32-bit, 2002 initialization) drives every simulation in this
//! crate. A generator is identified by a `(master, stream)` pair; stream 0 is
//! the plain single-seed initialization so the canonical reference vectors
//! hold, and stream `s > 0` mixes `(master, s)` through a splitmix64 hash
//! into the array initializer. Distinct streams give decorrelated sequences,
//! and every emitted report records the pair so any number can be replayed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// Golden-ratio increment used to spread stream ids before hashing.
const STREAM_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replayable identity of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub stream: u64,
}

/// MT19937 state: 624 words plus a cursor. Single-owner; to parallelize,
/// hand each worker its own stream.
#[derive(Clone)]
pub struct Mt19937 {
    mt: [u32; N],
    mti: usize,
    seed: SeedRecord,
}

impl Mt19937 {
    /// Initialize from a master seed and a stream id.
    pub fn seed(master: u64, stream: u64) -> Self {
        let mut gen = Mt19937 {
            mt: [0u32; N],
            mti: N + 1,
            seed: SeedRecord { master, stream },
        };
        if stream == 0 {
            gen.init_genrand(master as u32);
        } else {
            let z = splitmix64(master ^ stream.wrapping_mul(STREAM_GAMMA));
            gen.init_by_array(&[z as u32, (z >> 32) as u32]);
        }
        gen
    }

    pub fn seed_record(&self) -> SeedRecord {
        self.seed
    }

    /// 2002 single-seed initialization recurrence.
    fn init_genrand(&mut self, s: u32) {
        self.mt[0] = s;
        for i in 1..N {
            self.mt[i] = 1_812_433_253u32
                .wrapping_mul(self.mt[i - 1] ^ (self.mt[i - 1] >> 30))
                .wrapping_add(i as u32);
        }
        self.mti = N;
    }

    /// 2002 array initialization.
    fn init_by_array(&mut self, key: &[u32]) {
        self.init_genrand(19_650_218);
        let mut i = 1usize;
        let mut j = 0usize;
        for _ in 0..N.max(key.len()) {
            self.mt[i] = (self.mt[i]
                ^ (self.mt[i - 1] ^ (self.mt[i - 1] >> 30)).wrapping_mul(1_664_525))
            .wrapping_add(key[j])
            .wrapping_add(j as u32);
            i += 1;
            j += 1;
            if i >= N {
                self.mt[0] = self.mt[N - 1];
                i = 1;
            }
            if j >= key.len() {
                j = 0;
            }
        }
        for _ in 0..N - 1 {
            self.mt[i] = (self.mt[i]
                ^ (self.mt[i - 1] ^ (self.mt[i - 1] >> 30)).wrapping_mul(1_566_083_941))
            .wrapping_sub(i as u32);
            i += 1;
            if i >= N {
                self.mt[0] = self.mt[N - 1];
                i = 1;
            }
        }
        self.mt[0] = 0x8000_0000;
    }

    /// Next raw 32-bit word.
    pub fn next_u32(&mut self) -> u32 {
        if self.mti >= N {
            for i in 0..N {
                let y = (self.mt[i] & UPPER_MASK) | (self.mt[(i + 1) % N] & LOWER_MASK);
                let twisted = (y >> 1) ^ if y & 1 == 1 { MATRIX_A } else { 0 };
                self.mt[i] = self.mt[(i + M) % N] ^ twisted;
            }
            self.mti = 0;
        }
        let mut y = self.mt[self.mti];
        self.mti += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }

    /// Uniform draw in [0, 1) with 53-bit resolution (two 32-bit words).
    pub fn uniform01(&mut self) -> f64 {
        let a = (self.next_u32() >> 5) as f64;
        let b = (self.next_u32() >> 6) as f64;
        (a * 67_108_864.0 + b) / 9_007_199_254_740_992.0
    }

    /// Uniform draw in [a, b].
    pub fn uniform_ab(&mut self, a: f64, b: f64) -> Result<f64> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!(
                "uniform_ab requires a < b, got a={a}, b={b}"
            )));
        }
        Ok(a + (b - a) * self.uniform01())
    }

    /// Two independent standard normal deviates from one Box-Muller step:
    /// `(sin(2*pi*r1)*sqrt(-2 ln r2), cos(2*pi*r1)*sqrt(-2 ln r2))`.
    /// A zero `r2` is re-drawn so the logarithm stays finite.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let r1 = self.uniform01();
        let mut r2 = self.uniform01();
        while r2 == 0.0 {
            r2 = self.uniform01();
        }
        let radius = (-2.0 * r2.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * r1;
        (angle.sin() * radius, angle.cos() * radius)
    }

    /// Cauchy draw by CDF inversion: `mu + lambda * tan(pi*(u - 1/2))`.
    /// Draws with `u` in {0, 1} are re-drawn to keep the tangent finite.
    pub fn cauchy_sample(&mut self, mu: f64, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cauchy_sample requires lambda > 0, got {lambda}"
            )));
        }
        let mut u = self.uniform01();
        while u == 0.0 || u == 1.0 {
            u = self.uniform01();
        }
        Ok(mu + lambda * (std::f64::consts::PI * (u - 0.5)).tan())
    }
}

/// Normal deviate source that keeps the second Box-Muller deviate of each
/// pair for the next call, so n draws consume ceil(n/2) pairs.
pub struct NormalSource {
    gen: Mt19937,
    cached: Option<f64>,
}

impl NormalSource {
    pub fn new(gen: Mt19937) -> Self {
        Self { gen, cached: None }
    }

    pub fn draw(&mut self) -> f64 {
        if let Some(second) = self.cached.take() {
            return second;
        }
        let (first, second) = self.gen.normal_pair();
        self.cached = Some(second);
        first
    }

    pub fn into_inner(self) -> Mt19937 {
        self.gen
    }
}
