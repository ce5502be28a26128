use serde::{Deserialize, Serialize};

use super::genome::{low_mask, rotr, Genome};
use crate::error::{NkError, Result};

/// Exact overlap `numerator / denominator` with `denominator = N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OverlapValue {
    pub numerator: i64,
    pub denominator: u32,
}

impl OverlapValue {
    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator as i64
    }
}

fn same_len(g1: &Genome, g2: &Genome) -> Result<usize> {
    g2.check_len(g1.len())?;
    Ok(g1.len())
}

/// `N * Q` for an agreement mask: each maximal circular run of agreeing loci
/// of length `L >= K+1` contributes `L - K`; full agreement gives `N`.
pub(crate) fn epistatic_count(agree: u64, n: usize, k: usize) -> u32 {
    let mask = low_mask(n);
    let agree = agree & mask;
    if agree == mask {
        return n as u32;
    }
    // Rotate so that the top locus disagrees; runs then never wrap.
    let z = (!agree & mask).trailing_zeros() as usize;
    let mut x = rotr(agree, (z + 1) % n, n);
    let mut total = 0u32;
    while x != 0 {
        let start = x.trailing_zeros();
        x >>= start;
        let len = (!x).trailing_zeros() as usize;
        if len > k {
            total += (len - k) as u32;
        }
        x = x.checked_shr(len as u32).unwrap_or(0);
    }
    total
}

/// Epistatic overlap: fraction of loci whose whole `(K+1)`-window agrees.
pub fn overlap_q(g1: &Genome, g2: &Genome, k: usize) -> Result<OverlapValue> {
    let n = same_len(g1, g2)?;
    if k >= n {
        return Err(NkError::KTooLarge { k, max: n - 1 });
    }
    Ok(OverlapValue {
        numerator: epistatic_count(!(g1.bits() ^ g2.bits()), n, k) as i64,
        denominator: n as u32,
    })
}

/// Normalized scalar product, `N * R = N - 2 * hamming`.
pub fn overlap_r(g1: &Genome, g2: &Genome) -> Result<OverlapValue> {
    let n = same_len(g1, g2)?;
    Ok(OverlapValue {
        numerator: n as i64 - 2 * g1.hamming(g2) as i64,
        denominator: n as u32,
    })
}

/// `Q(g, 1)`: the epistatic overlap with the all-(+1) genome.
pub fn overlap_q_one(g: &Genome, k: usize) -> Result<OverlapValue> {
    overlap_q(g, &Genome::ones(g.len())?, k)
}

/// Sum of `sigma1_{i+j} sigma2_{i+j}` over `j = 0..=K`, in `-(K+1)..=K+1`.
pub fn windowed_overlap_count(g1: &Genome, g2: &Genome, i: usize, k: usize) -> Result<i64> {
    let n = same_len(g1, g2)?;
    if k >= n {
        return Err(NkError::KTooLarge { k, max: n - 1 });
    }
    let disagree = rotr(g1.bits() ^ g2.bits(), i % n, n) & low_mask(k + 1);
    Ok(k as i64 + 1 - 2 * disagree.count_ones() as i64)
}

/// Windowed overlap `R_{N,K,i}` at locus `i`.
pub fn windowed_overlap(g1: &Genome, g2: &Genome, i: usize, k: usize) -> Result<f64> {
    Ok(windowed_overlap_count(g1, g2, i, k)? as f64 / (k + 1) as f64)
}
