//! Seeded random streams.
//!
//! Every stochastic operation draws from Xoshiro256++ seeded through
//! SplitMix64 (`Xoshiro256PlusPlus::seed_from_u64`). Uniform reals take the
//! top 53 bits of a 64-bit output scaled by 2^-53, giving values in [0, 1).
//! Independent streams are obtained with the generator's `jump()` function:
//! stream `k` is the master generator advanced by `k` jumps (2^128 steps
//! each), so streams never overlap in practice.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct Stream(Xoshiro256PlusPlus);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Stream `k` of the family rooted at `seed`.
    pub fn split(seed: u64, k: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        for _ in 0..k {
            rng.jump();
        }
        Stream(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random::<u64>()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal deviate by the Box-Muller cosine branch:
    /// `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`, consuming two uniforms.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
