//! Exact counts of genomes by epistatic overlap with the all-(+1) genome.
//!
//! `N Q(sigma, 1)` only depends on the maximal circular runs of +1: a run of
//! length `L >= K+1` contributes `L - K`. The transfer DP conditions on the
//! head run (the +1s before the first -1), scans the remaining loci as a
//! linear string, and rejoins the trailing run with the head at the wrap.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NkError, Result};
use crate::landscape::{overlap_q_one, Genome, MAX_LOCI};
use crate::theory::entropy_h;

/// `counts[l] = |{sigma : N Q(sigma) = l}|` for `l = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub n: usize,
    pub k: usize,
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn get(&self, l: usize) -> &BigUint {
        &self.counts[l]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Nonzero entries in ascending `l`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.counts.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    pub fn get_f64(&self, l: usize) -> f64 {
        self.counts[l].to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for CountTable {
    /// `{0:7,1:4,2:4,4:1}`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, c)) in self.nonzero().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}:{c}")?;
        }
        f.write_str("}")
    }
}

struct DecimalCounts<'a>(&'a CountTable);

impl Serialize for DecimalCounts<'_> {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(None)?;
        for (l, c) in self.0.nonzero() {
            m.serialize_entry(&l.to_string(), &c.to_str_radix(10))?;
        }
        m.end()
    }
}

impl Serialize for CountTable {
    /// `{"n": N, "k": K, "counts": {"l": "decimal", ...}}`, zero entries omitted.
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(3))?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("k", &self.k)?;
        m.serialize_entry("counts", &DecimalCounts(self))?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for CountTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            k: usize,
            counts: BTreeMap<String, String>,
        }
        let raw = Raw::deserialize(de)?;
        let mut counts = vec![BigUint::zero(); raw.n + 1];
        for (l, c) in raw.counts {
            let l: usize = l.parse().map_err(D::Error::custom)?;
            if l > raw.n {
                return Err(D::Error::custom(format!("overlap index {l} exceeds N")));
            }
            counts[l] = c.parse().map_err(D::Error::custom)?;
        }
        Ok(CountTable {
            n: raw.n,
            k: raw.k,
            counts,
        })
    }
}

fn check_range(n: usize, k: usize, max_n: usize) -> Result<()> {
    if n < 2 || n > max_n {
        return Err(NkError::Domain(format!("N = {n} outside 2..={max_n}")));
    }
    if k < 1 || k > n - 1 {
        return Err(NkError::Domain(format!("K = {k} outside 1..={}", n - 1)));
    }
    Ok(())
}

/// Exact overlap counts by the circular transfer DP, `N <= 64`.
pub fn count_by_overlap(n: usize, k: usize) -> Result<CountTable> {
    check_range(n, k, MAX_LOCI)?;
    let mut counts = vec![BigUint::zero(); n + 1];
    counts[n] = BigUint::one();

    // layer[b][acc]: linear strings of the current length whose closed runs
    // contribute `acc` and whose trailing +1 run has length exactly `b`.
    let mut layer: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); n + 1]];
    layer[0][0] = BigUint::one();
    for m in 0..n {
        // Genomes with head run a = n - 1 - m: 1^a, then -1, then this layer.
        let a = n - 1 - m;
        for (b, row) in layer.iter().enumerate() {
            let wrap = (a + b).saturating_sub(k);
            for (acc, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    counts[acc + wrap] += c;
                }
            }
        }
        if m + 1 == n {
            break;
        }
        let mut next = vec![vec![BigUint::zero(); n + 1]; m + 2];
        for (b, row) in layer.iter().enumerate() {
            let closed = b.saturating_sub(k);
            for (acc, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                next[0][acc + closed] += c;
                next[b + 1][acc] += c;
            }
        }
        layer = next;
    }
    Ok(CountTable { n, k, counts })
}

/// Direct enumeration of all `2^N` genomes, `N <= 20`.
pub fn count_by_overlap_bruteforce(n: usize, k: usize) -> Result<CountTable> {
    check_range(n, k, 20)?;
    let mut raw = vec![0u64; n + 1];
    for bits in 0..(1u64 << n) {
        let g = Genome::from_bits(n, bits)?;
        raw[overlap_q_one(&g, k)?.numerator as usize] += 1;
    }
    Ok(CountTable {
        n,
        k,
        counts: raw.into_iter().map(BigUint::from).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBoundRow {
    pub l: usize,
    pub count: String,
    pub bound: String,
    pub holds: bool,
}

/// Upper bound `N 2^{N-(K+l)}` on `counts[l]` for `1 <= l <= N-K-1`.
#[derive(Debug, Clone, Serialize)]
pub struct UpperBoundReport {
    pub n: usize,
    pub k: usize,
    /// `N^2 2^-K <= 1/2`, the large-N hypothesis of the bound.
    pub applicable: bool,
    pub rows: Vec<UpperBoundRow>,
    pub all_hold: bool,
    /// `counts[l] = 0` for `N-K <= l <= N-1`.
    pub gap_is_empty: bool,
}

pub fn count_upper_bound(n: usize, k: usize, l: usize) -> BigUint {
    BigUint::from(n) << (n - k - l)
}

pub fn lemma2_bound_check(table: &CountTable) -> UpperBoundReport {
    let (n, k) = (table.n, table.k);
    let applicable = (n * n) as f64 * 2f64.powi(-(k as i32)) <= 0.5;
    let rows: Vec<UpperBoundRow> = (1..n - k)
        .map(|l| {
            let bound = count_upper_bound(n, k, l);
            let count = table.get(l);
            UpperBoundRow {
                l,
                count: count.to_string(),
                bound: bound.to_string(),
                holds: *count <= bound,
            }
        })
        .collect();
    let all_hold = rows.iter().all(|r| r.holds);
    let gap_is_empty = (n - k..n).all(|l| table.get(l).is_zero());
    UpperBoundReport {
        n,
        k,
        applicable,
        rows,
        all_hold,
        gap_is_empty,
    }
}

fn check_l(n: usize, k: usize, l: usize) -> Result<usize> {
    if n == 0 || k >= n || l < 1 || l + k + 1 > n {
        return Err(NkError::Domain(format!(
            "need 1 <= l <= N-K-1, got N = {n}, K = {k}, l = {l}"
        )));
    }
    Ok(n - k - l - 1)
}

/// Single-block construction bound `N 2^{N-K-l-1-floor((N-K-l-1)/(K+1))}`,
/// evaluated literally.
pub fn tightness_lower_bound(n: usize, k: usize, l: usize) -> Result<BigUint> {
    let r = check_l(n, k, l)?;
    Ok(BigUint::from(n) << (r - r / (k + 1)))
}

/// Single-block construction with the last free locus also forced to -1 so
/// the free segment cannot extend the block across the wrap:
/// `N 2^{r - ceil(r/(K+1))}` with `r = N-K-l-1`.
pub fn tightness_lower_bound_corrected(n: usize, k: usize, l: usize) -> Result<BigUint> {
    let r = check_l(n, k, l)?;
    Ok(BigUint::from(n) << (r - r.div_ceil(k + 1)))
}

pub fn binomial(n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m);
    let mut acc = BigUint::one();
    for i in 0..m {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct RCount {
    pub n: usize,
    pub r_numerator: i64,
    pub count: BigUint,
    /// `log2` of `2^{N (h(|r|/N) - 1)}`, which bounds `count`.
    pub log2_entropy_bound: f64,
    pub within_bound: bool,
}

/// `|{sigma : sum_i sigma_i = r}| = C(N, (N + r) / 2)`, with the entropy bound.
pub fn count_by_r(n: usize, r_numerator: i64) -> Result<RCount> {
    if n == 0 || r_numerator.unsigned_abs() as usize > n || (n as i64 - r_numerator) % 2 != 0 {
        return Err(NkError::Domain(format!(
            "N R = {r_numerator} must satisfy |N R| <= N and N R = N mod 2 (N = {n})"
        )));
    }
    let m = ((n as i64 + r_numerator) / 2) as usize;
    let count = binomial(n, m);
    let u = r_numerator.unsigned_abs() as f64 / n as f64;
    let log2_entropy_bound = n as f64 * (entropy_h(u)? - 1.0);
    let log2_count = big_log2(&count);
    Ok(RCount {
        n,
        r_numerator,
        within_bound: log2_count <= log2_entropy_bound + 1e-12,
        count,
        log2_entropy_bound,
    })
}

fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 52;
    (x >> shift).to_f64().unwrap().log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(usize, u64)], n: usize) -> Vec<BigUint> {
        let mut v = vec![BigUint::zero(); n + 1];
        for &(l, c) in pairs {
            v[l] = BigUint::from(c);
        }
        v
    }

    #[test]
    fn small_tables() {
        let t = count_by_overlap(4, 1).unwrap();
        assert_eq!(
            t.counts(),
            table(&[(0, 7), (1, 4), (2, 4), (4, 1)], 4).as_slice()
        );
        assert_eq!(t.to_string(), "{0:7,1:4,2:4,4:1}");
        let rem = count_by_overlap(5, 4).unwrap();
        assert_eq!(rem.to_string(), "{0:31,5:1}");
    }

    #[test]
    fn dp_matches_bruteforce() {
        for n in 2..=14 {
            for k in 1..n {
                assert_eq!(
                    count_by_overlap(n, k).unwrap(),
                    count_by_overlap_bruteforce(n, k).unwrap()
                );
            }
        }
        for (n, k) in [(12, 3), (16, 11), (14, 7)] {
            assert_eq!(
                count_by_overlap(n, k).unwrap(),
                count_by_overlap_bruteforce(n, k).unwrap()
            );
        }
    }

    #[test]
    fn totals_gap_and_unit_mass() {
        for n in [2usize, 7, 31, 64] {
            for k in 1..n {
                let t = count_by_overlap(n, k).unwrap();
                assert_eq!(t.total(), BigUint::one() << n);
                assert_eq!(*t.get(n), BigUint::one());
                if k <= n - 2 {
                    assert!(lemma2_bound_check(&t).gap_is_empty);
                }
            }
        }
    }

    #[test]
    fn upper_bound_rows() {
        let rep = lemma2_bound_check(&count_by_overlap(20, 12).unwrap());
        assert!(rep.applicable);
        assert!(rep.all_hold);
        assert_eq!(rep.rows.first().unwrap().l, 1);
        assert_eq!(rep.rows.last().unwrap().l, 7);
        let low = lemma2_bound_check(&count_by_overlap(16, 2).unwrap());
        assert!(!low.applicable);
    }

    #[test]
    fn tightness_bounds() {
        let t = count_by_overlap(20, 12).unwrap();
        // literal form at the last row: N 2^0
        assert_eq!(
            tightness_lower_bound(20, 12, 7).unwrap(),
            BigUint::from(20u32)
        );
        assert_eq!(*t.get(7), BigUint::from(20u32));
        // literal form overcounts at l = 3 (320 > 160)
        assert_eq!(
            tightness_lower_bound(20, 12, 3).unwrap(),
            BigUint::from(320u32)
        );
        assert_eq!(*t.get(3), BigUint::from(160u32));
        for l in 1..=7 {
            let lb = tightness_lower_bound_corrected(20, 12, l).unwrap();
            assert!(lb <= *t.get(l));
            assert!(lb <= count_upper_bound(20, 12, l));
        }
        assert!(tightness_lower_bound(20, 12, 8).is_err());
        assert!(tightness_lower_bound(20, 12, 0).is_err());
    }

    #[test]
    fn r_counts() {
        assert_eq!(count_by_r(10, 10).unwrap().count, BigUint::one());
        assert_eq!(count_by_r(10, 0).unwrap().count, BigUint::from(252u32));
        assert!(count_by_r(10, 3).is_err());
        assert!(count_by_r(10, 12).is_err());
        for r in (-24..=24).step_by(2) {
            let c = count_by_r(24, r).unwrap();
            assert!(c.within_bound, "r = {r}");
        }
    }

    #[test]
    fn json_shape() {
        let t = count_by_overlap(4, 1).unwrap();
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(
            js,
            r#"{"n":4,"k":1,"counts":{"0":"7","1":"4","2":"4","4":"1"}}"#
        );
        let back: CountTable = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
        let big = count_by_overlap(64, 5).unwrap();
        let back: CountTable = serde_json::from_str(&serde_json::to_string(&big).unwrap()).unwrap();
        assert_eq!(back, big);
    }
}
