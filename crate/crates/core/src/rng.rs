//! Portable seeded generator.
//!
//! A plain 64-bit linear congruential generator with Knuth's MMIX constants.
//! Every random decision in the crate (fold shuffles, synthesis phases, weight
//! initialisation, dropout masks, mini-batch order) draws from it, so runs can
//! be reproduced bit-for-bit from a seed on any platform.

use std::f64::consts::PI;

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

/// 64-bit LCG: `state <- state * 6364136223846793005 + 1442695040888963407`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    /// Advance once and return the new state.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// High 32 bits of the next state (the low bits of an LCG are weak).
    pub fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[low, high)`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Uniform phase in `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        2.0 * PI * self.next_f64()
    }

    /// Uniform integer in `[0, n)`; `n` must be non-zero.
    ///
    /// Multiply-shift on the high 32 bits. The bias is below 2^-32·n, which is
    /// irrelevant for the list sizes used here.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u32() as u64 * n as u64) >> 32) as usize
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Independent child generator for a numbered stream.
    ///
    /// The child seed mixes the current state with the stream id through a
    /// SplitMix64 finaliser, without advancing `self`.
    pub fn derive(&self, stream: u64) -> Lcg {
        Lcg::new(mix(
            self.state ^ mix(stream.wrapping_add(0x9E37_79B9_7F4A_7C15))
        ))
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
