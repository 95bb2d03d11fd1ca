//! Counter-based random draws.
//!
//! Every variate is a pure function of `(seed, stream, step, slot)`: no
//! generator state advances, so per-coordinate draws inside a half-step can
//! be evaluated in any order, or in parallel, and still produce the same
//! numbers. Streams separate chains (or replicas, or init domains) that must
//! be statistically independent under one master seed.

use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Identifies one independent draw stream: a master seed plus a stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngKey {
    pub seed: u64,
    pub stream: u64,
}

impl RngKey {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngKey { seed, stream }
    }

    /// Raw 64 mixed bits for counter position `(step, slot)`.
    #[inline]
    pub fn bits(&self, step: u64, slot: u64) -> u64 {
        let mut h = mix(self.seed ^ GOLDEN);
        h = mix(h ^ self.stream);
        h = mix(h ^ step);
        mix(h ^ slot)
    }

    /// Uniform on the open interval (0, 1); both endpoints excluded.
    #[inline]
    pub fn unit_open(&self, step: u64, slot: u64) -> f64 {
        // 53-bit mantissa, offset by half an ulp so 0.0 and 1.0 are unreachable.
        (((self.bits(step, slot) >> 11) as f64) + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Unit-rate exponential draw via inverse transform.
    #[inline]
    pub fn exp1(&self, step: u64, slot: u64) -> f64 {
        -self.unit_open(step, slot).ln()
    }
}
