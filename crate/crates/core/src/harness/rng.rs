//! Seeded generator for reproducible instances.
//!
//! The stream is xoshiro256** with its 256-bit state filled from the 64-bit
//! seed by SplitMix64. Derived draws:
//!
//! - `uniform()`: `(x >> 11) · 2⁻⁵³` for the next 64-bit output `x`, in `[0, 1)`;
//! - `below(k)`: `⌊uniform() · k⌋`;
//! - `disk(r)`: `r·√U₁ · e^{2πi U₂}` from two consecutive uniforms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Clone, Debug)]
pub struct InstanceRng {
    inner: Xoshiro256StarStar,
}

impl InstanceRng {
    pub fn new(seed: u64) -> Self {
        InstanceRng {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, k: usize) -> usize {
        ((self.uniform() * k as f64) as usize).min(k.saturating_sub(1))
    }

    /// Uniform point of the closed disk `|z| <= radius`.
    pub fn disk(&mut self, radius: f64) -> Complex64 {
        let r = radius * self.uniform().sqrt();
        let theta = TAU * self.uniform();
        Complex64::from_polar(r, theta)
    }
}
