use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NkError, Result};

pub const MAX_LOCI: usize = 64;

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Cyclic right rotation of an `n`-bit word.
#[inline]
pub(crate) fn rotr(x: u64, r: usize, n: usize) -> u64 {
    let r = r % n;
    if r == 0 {
        return x;
    }
    ((x >> r) | (x << (n - r))) & low_mask(n)
}

/// Binary genome of length `N <= 64`, bit-packed with locus `i` in bit `i`.
///
/// Bit 1 is spin +1 and bit 0 is spin -1. All locus arithmetic is cyclic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Genome {
    n: u8,
    bits: u64,
}

impl Genome {
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_LOCI {
            return Err(NkError::BadLength(n));
        }
        Ok(Self {
            n: n as u8,
            bits: bits & low_mask(n),
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_bits(n, 0)
    }

    /// The all-(+1) genome.
    pub fn ones(n: usize) -> Result<Self> {
        Self::from_bits(n, u64::MAX)
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                _ => return Err(NkError::Domain(format!("spin {s} at locus {i}"))),
            }
        }
        Self::from_bits(spins.len(), bits)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::from_bits(n, rng.gen::<u64>())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> (i % self.len())) & 1 == 1
    }

    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        if self.bit(i) {
            1
        } else {
            -1
        }
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.len()).map(|i| self.spin(i)).collect()
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        self.bits ^= 1 << (j % self.len());
    }

    #[inline]
    pub fn flipped(mut self, j: usize) -> Self {
        self.flip(j);
        self
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            bits: !self.bits & low_mask(self.len()),
        }
    }

    /// `width` consecutive loci starting at `i` (cyclic), locus `i` in the LSB.
    #[inline]
    pub fn window(&self, i: usize, width: usize) -> u64 {
        rotr(self.bits, i, self.len()) & low_mask(width)
    }

    pub fn hamming(&self, other: &Self) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(NkError::LengthMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Genome {
    /// Locus 0 first, `1` for +1 and `0` for -1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

impl std::str::FromStr for Genome {
    type Err = NkError;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (i, c) in s.trim().chars().enumerate() {
            match c {
                '1' | '+' => bits |= 1u64.checked_shl(i as u32).unwrap_or(0),
                '0' | '-' => {}
                _ => return Err(NkError::Domain(format!("bad genome character {c:?}"))),
            }
        }
        Self::from_bits(s.trim().chars().count(), bits)
    }
}

/// A `(K+1)`-bit window word at a locus; bit `j` encodes locus `i + j mod N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowWord {
    pub locus: usize,
    pub word: u64,
}
