//! Stateless 64-bit mixing and a counter-based generator for Monte Carlo chains.
//!
//! Disorder (fitness components) and chain randomness are drawn from disjoint
//! hash domains: every key is first folded with a domain tag, so a disorder
//! seed can never reproduce a chain stream or vice versa.

use rand_core::{impls, RngCore};
use serde::{Deserialize, Serialize};

pub const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Domain tag for fitness components.
pub const DOMAIN_DISORDER: u64 = 0x4e4b_2d44_4953_4f52;
/// Domain tag for Markov chain streams.
pub const DOMAIN_CHAIN: u64 = 0x4e4b_2d43_4841_494e;
/// Domain tag for deriving auxiliary seeds (correlated copies, replicas).
pub const DOMAIN_DERIVE: u64 = 0x4e4b_2d44_4552_4956;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One absorption round: advance by the golden gamma, xor the input, finalize.
#[inline]
pub fn absorb(state: u64, input: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN_GAMMA) ^ input)
}

/// Folds a domain tag and a sequence of words into one 64-bit key.
pub fn fold(domain: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(domain), |s, &w| absorb(s, w))
}

/// Derives a child seed, e.g. the independent copies of a correlated pair.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    fold(DOMAIN_DERIVE, &[parent, label])
}

/// `count` disorder seeds derived from `base`, addressed by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub base: u64,
    pub count: usize,
}

impl SeedRange {
    pub fn new(base: u64, count: usize) -> Self {
        Self { base, count }
    }

    pub fn seed(&self, i: usize) -> u64 {
        derive_seed(self.base, i as u64)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.count).map(|i| self.seed(i))
    }
}

/// Maps the top 53 bits to the open interval (0, 1), clamped to
/// `[2^-53, 1 - 2^-53]`.
#[inline]
pub fn unit_open(h: u64) -> f64 {
    const EPS: f64 = 1.0 / (1u64 << 53) as f64;
    let u = ((h >> 11) as f64 + 0.5) * EPS;
    u.clamp(EPS, 1.0 - EPS)
}

/// Counter-based generator keyed by `(rng_seed, stream ids...)`.
///
/// Output `t` is a pure function of the key and `t`, so a chain can be
/// replayed from any step under any parallel schedule.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(rng_seed: u64, stream: &[u64]) -> Self {
        let key = stream
            .iter()
            .fold(absorb(mix64(DOMAIN_CHAIN), rng_seed), |s, &w| absorb(s, w));
        Self { key, counter: 0 }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Jumps to output index `t`.
    pub fn seek(&mut self, t: u64) {
        self.counter = t;
    }

    /// Uniform in (0, 1).
    pub fn uniform(&mut self) -> f64 {
        unit_open(self.next_u64())
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift; bias < n / 2^64).
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let t = self.counter;
        self.counter = self.counter.wrapping_add(1);
        absorb(absorb(self.key, t), GOLDEN_GAMMA)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
