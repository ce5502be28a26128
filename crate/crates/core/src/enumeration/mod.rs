//! Exhaustive computations over all `2^N` genomes.
//!
//! Single-genome scans walk a Gray code inside fixed high-bit prefixes; the
//! prefixes run in parallel and are merged in ascending order, so every
//! result is bit-identical for any thread count.

mod constraint;
mod pairs;

pub use constraint::{ConstraintSet, IntInterval};
pub use pairs::{
    constrained_free_energy, coupled_max, exact_overlap_law, pair_weights, CoupledMax, OverlapLaw,
    OverlapMass,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NkError, Result};
use crate::landscape::{epistatic_count, Genome, Landscape};

/// Largest `N` for scans over single genomes and over pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanLimits {
    pub single: usize,
    pub pair: usize,
}

impl Default for ScanLimits {
    fn default() -> Self {
        Self {
            single: 26,
            pair: 14,
        }
    }
}

impl ScanLimits {
    pub fn check_single(&self, n: usize) -> Result<()> {
        if n > self.single {
            return Err(NkError::ScanLimit {
                n,
                limit: self.single,
            });
        }
        Ok(())
    }

    pub fn check_pair(&self, n: usize) -> Result<()> {
        if n > self.pair {
            return Err(NkError::ScanLimit {
                n,
                limit: self.pair,
            });
        }
        Ok(())
    }
}

const PREFIX_BITS: usize = 10;

/// Runs `visit(acc, bits, H)` over every genome and returns one accumulator
/// per prefix chunk, in ascending prefix order.
///
/// `H` is maintained incrementally along the Gray code and recomputed from
/// scratch at each chunk start.
pub fn scan_chunks<A, I, V>(land: &Landscape, init: I, visit: V) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, u64, f64) + Sync,
{
    let n = land.n();
    let p = n.min(PREFIX_BITS);
    let low = n - p;
    (0..1u64 << p)
        .into_par_iter()
        .map(|prefix| {
            let mut acc = init();
            let mut bits = prefix << low;
            let mut h = land.fitness_bits(bits);
            visit(&mut acc, bits, h);
            for t in 1..1u64 << low {
                let j = t.trailing_zeros() as usize;
                h += land.delta_bits(bits, j);
                bits ^= 1 << j;
                visit(&mut acc, bits, h);
            }
            acc
        })
        .collect()
}

/// `H(sigma)` for every genome, indexed by bit pattern, each from scratch.
pub fn fitness_table(land: &Landscape, limit: usize) -> Result<Vec<f64>> {
    let n = land.n();
    if n > limit {
        return Err(NkError::ScanLimit { n, limit });
    }
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|b| land.fitness_bits(b))
        .collect())
}

/// Relative band inside which incrementally tracked values are re-checked.
fn band(h: f64) -> f64 {
    1e-9 * (1.0 + h.abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateResult {
    pub sigma_star: Genome,
    /// `max H / N`.
    pub m: f64,
    pub argmax_ties: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gibbs {
    pub beta: f64,
    /// `(1/N) ln sum_sigma e^{beta H}`.
    pub f: f64,
    /// `<H>_beta / N`.
    pub mean_energy: f64,
    /// `sum_sigma p(sigma)^2`, the replica probability of `Q = 1`.
    pub p_q1: f64,
    pub overlap_law: Option<OverlapLaw>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalMaxima {
    pub count: u64,
    /// Up to the requested number of maxima, smallest bit patterns first.
    pub examples: Vec<Genome>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Scanner {
    pub limits: ScanLimits,
}

/// Streaming `ln sum e^{x}` with first and second weighted moments.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
    energy: f64,
    sq: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            energy: 0.0,
            sq: 0.0,
        }
    }

    #[inline]
    fn push(&mut self, x: f64, h: f64) {
        if x > self.max {
            let r = (self.max - x).exp();
            self.sum *= r;
            self.energy *= r;
            self.sq *= r * r;
            self.max = x;
        }
        let w = (x - self.max).exp();
        self.sum += w;
        self.energy += w * h;
        self.sq += w * w;
    }

    fn merge(&mut self, o: &LogSum) {
        if o.sum == 0.0 {
            return;
        }
        let m = self.max.max(o.max);
        let (a, b) = ((self.max - m).exp(), (o.max - m).exp());
        self.sum = self.sum * a + o.sum * b;
        self.energy = self.energy * a + o.energy * b;
        self.sq = self.sq * a * a + o.sq * b * b;
        self.max = m;
    }

    fn ln_sum(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

impl Scanner {
    pub fn new(limits: ScanLimits) -> Self {
        Self { limits }
    }

    pub fn ground_state(&self, land: &Landscape) -> Result<GroundStateResult> {
        self.limits.check_single(land.n())?;
        // Track candidates within a small band of the running maximum, then
        // settle the maximum and ties on exact from-scratch values.
        let chunks = scan_chunks(
            land,
            || (f64::NEG_INFINITY, Vec::<u64>::new()),
            |acc, bits, h| {
                if h > acc.0 + band(acc.0) {
                    acc.0 = h;
                    acc.1.clear();
                    acc.1.push(bits);
                } else if h >= acc.0 - band(acc.0) {
                    acc.0 = acc.0.max(h);
                    acc.1.push(bits);
                }
            },
        );
        let top = chunks.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let mut best = f64::NEG_INFINITY;
        let mut arg = u64::MAX;
        let mut ties = 0u64;
        for (h, cands) in &chunks {
            if *h < top - 2.0 * band(top) {
                continue;
            }
            for &b in cands {
                let exact = land.fitness_bits(b);
                if exact > best {
                    best = exact;
                    arg = b;
                    ties = 1;
                } else if exact == best {
                    ties += 1;
                    arg = arg.min(b);
                }
            }
        }
        Ok(GroundStateResult {
            sigma_star: Genome::from_bits(land.n(), arg)?,
            m: best / land.n() as f64,
            argmax_ties: ties,
        })
    }

    /// `|{sigma : H(sigma) >= s N}|`.
    pub fn level_set_count(&self, land: &Landscape, s: f64) -> Result<u64> {
        self.limits.check_single(land.n())?;
        if s == f64::NEG_INFINITY {
            return Ok(1u64 << land.n());
        }
        let thr = s * land.n() as f64;
        let chunks = scan_chunks(
            land,
            || 0u64,
            |acc, bits, h| {
                let inside = if (h - thr).abs() <= band(thr) {
                    land.fitness_bits(bits) >= thr
                } else {
                    h >= thr
                };
                *acc += inside as u64;
            },
        );
        Ok(chunks.iter().sum())
    }

    /// Exact Gibbs summaries for several inverse temperatures in one scan.
    pub fn free_energy_grid(&self, land: &Landscape, betas: &[f64]) -> Result<Vec<Gibbs>> {
        self.limits.check_single(land.n())?;
        if let Some(&b) = betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(NkError::Domain(format!(
                "beta = {b} must be finite and >= 0"
            )));
        }
        let chunks = scan_chunks(
            land,
            || vec![LogSum::new(); betas.len()],
            |acc, _, h| {
                for (ls, &b) in acc.iter_mut().zip(betas) {
                    ls.push(b * h, h);
                }
            },
        );
        let nf = land.n() as f64;
        Ok(betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| {
                let mut tot = LogSum::new();
                for c in &chunks {
                    tot.merge(&c[i]);
                }
                Gibbs {
                    beta,
                    f: tot.ln_sum() / nf,
                    mean_energy: tot.energy / tot.sum / nf,
                    p_q1: tot.sq / (tot.sum * tot.sum),
                    overlap_law: None,
                }
            })
            .collect())
    }

    pub fn exact_free_energy(&self, land: &Landscape, beta: f64) -> Result<Gibbs> {
        Ok(self.free_energy_grid(land, &[beta])?.remove(0))
    }

    /// Genomes no single flip improves.
    pub fn local_maxima_census(&self, land: &Landscape, keep: usize) -> Result<LocalMaxima> {
        let n = land.n();
        self.limits.check_single(n)?;
        let chunks = scan_chunks(
            land,
            || (0u64, Vec::new()),
            |acc, bits, _| {
                if (0..n).all(|j| land.delta_bits(bits, j) <= 0.0) {
                    acc.0 += 1;
                    if acc.1.len() < keep {
                        acc.1.push(bits);
                    }
                }
            },
        );
        let count = chunks.iter().map(|c| c.0).sum();
        let mut all: Vec<u64> = chunks.into_iter().flat_map(|c| c.1).collect();
        all.sort_unstable();
        all.truncate(keep);
        Ok(LocalMaxima {
            count,
            examples: all
                .into_iter()
                .map(|b| Genome::from_bits(n, b))
                .collect::<Result<_>>()?,
        })
    }

    /// Greedy set of near-optimal genomes, pairwise `Q = 0` and `|R| < delta`.
    ///
    /// Scans `{H/N >= M - epsilon}` in descending fitness and keeps every
    /// genome compatible with all kept so far.
    pub fn peak_packing(&self, land: &Landscape, epsilon: f64, delta: f64) -> Result<Vec<Genome>> {
        self.limits.check_single(land.n())?;
        let n = land.n();
        if !(epsilon >= 0.0) {
            return Err(NkError::Domain(format!("epsilon = {epsilon} must be >= 0")));
        }
        // One pass: keep everything within epsilon of the running maximum,
        // pruning as the maximum rises, then settle on exact values.
        let width = epsilon * n as f64;
        let chunks = scan_chunks(
            land,
            || (f64::NEG_INFINITY, Vec::<(f64, u64)>::new(), 1024usize),
            |acc, bits, h| {
                acc.0 = acc.0.max(h);
                let floor = acc.0 - width - band(acc.0);
                if h >= floor {
                    acc.1.push((h, bits));
                    if acc.1.len() >= acc.2 {
                        acc.1.retain(|c| c.0 >= floor);
                        acc.2 = (2 * acc.1.len()).max(1024);
                    }
                }
            },
        );
        let exact: Vec<(f64, u64)> = chunks
            .into_iter()
            .flat_map(|c| c.1)
            .map(|(_, b)| (land.fitness_bits(b), b))
            .collect();
        let best = exact.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let thr = (best / n as f64 - epsilon) * n as f64;
        let mut level: Vec<(f64, u64)> = exact.into_iter().filter(|&(h, _)| h >= thr).collect();
        level.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let r_cap = delta * n as f64;
        let mut kept: Vec<u64> = Vec::new();
        for &(_, b) in &level {
            let ok = kept.iter().all(|&c| {
                let agree = !(b ^ c) & mask;
                let nr = 2 * agree.count_ones() as i64 - n as i64;
                epistatic_count(agree, n, land.k()) == 0 && (nr.abs() as f64) < r_cap
            });
            if ok {
                kept.push(b);
            }
        }
        kept.into_iter().map(|b| Genome::from_bits(n, b)).collect()
    }
}

pub fn ground_state(land: &Landscape) -> Result<GroundStateResult> {
    Scanner::default().ground_state(land)
}

pub fn level_set_count(land: &Landscape, s: f64) -> Result<u64> {
    Scanner::default().level_set_count(land, s)
}

pub fn exact_free_energy(land: &Landscape, beta: f64) -> Result<Gibbs> {
    Scanner::default().exact_free_energy(land, beta)
}

pub fn local_maxima_census(land: &Landscape) -> Result<u64> {
    Ok(Scanner::default().local_maxima_census(land, 0)?.count)
}

pub fn peak_packing(land: &Landscape, epsilon: f64, delta: f64) -> Result<Vec<Genome>> {
    Scanner::default().peak_packing(land, epsilon, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{CacheMode, LandscapeSpec};

    fn land(n: usize, k: usize, seed: u64) -> Landscape {
        Landscape::new(
            LandscapeSpec::with_k(n, k, seed)
                .unwrap()
                .cache(CacheMode::Table)
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gray_scan_covers_everything_once() {
        let l = land(13, 4, 5);
        let chunks = scan_chunks(&l, Vec::new, |acc: &mut Vec<(u64, f64)>, b, h| {
            acc.push((b, h))
        });
        let all: Vec<(u64, f64)> = chunks.into_iter().flatten().collect();
        assert_eq!(all.len(), 1 << 13);
        let mut seen = vec![false; 1 << 13];
        for &(b, h) in &all {
            assert!(!seen[b as usize]);
            seen[b as usize] = true;
            assert!((h - l.fitness_bits(b)).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_matches_table() {
        for (n, k, seed) in [(6, 0, 1), (10, 3, 2), (12, 11, 3)] {
            let l = land(n, k, seed);
            let t = fitness_table(&l, 20).unwrap();
            let (arg, max) =
                t.iter().enumerate().fold(
                    (0, f64::NEG_INFINITY),
                    |a, (i, &h)| if h > a.1 { (i, h) } else { a },
                );
            let gs = ground_state(&l).unwrap();
            assert_eq!(gs.sigma_star.bits(), arg as u64);
            assert_eq!(gs.m, max / n as f64);
            assert_eq!(gs.argmax_ties, 1);
        }
    }

    #[test]
    fn k0_factorizes() {
        let l = land(4, 0, 9);
        let per: f64 = (0..4)
            .map(|i| l.component(i, 0).unwrap().max(l.component(i, 1).unwrap()))
            .sum();
        assert!((ground_state(&l).unwrap().m - per / 4.0).abs() < 1e-15);
        assert_eq!(local_maxima_census(&l).unwrap(), 1);
    }

    #[test]
    fn level_sets() {
        let l = land(12, 5, 4);
        let gs = ground_state(&l).unwrap();
        assert_eq!(level_set_count(&l, gs.m + 1e-9).unwrap(), 0);
        assert_eq!(level_set_count(&l, gs.m).unwrap(), 1);
        assert_eq!(level_set_count(&l, f64::NEG_INFINITY).unwrap(), 4096);
        let t = fitness_table(&l, 20).unwrap();
        let direct = t.iter().filter(|&&h| h >= 0.3 * 12.0).count() as u64;
        assert_eq!(level_set_count(&l, 0.3).unwrap(), direct);
    }

    #[test]
    fn free_energy_against_direct_sum() {
        let l = land(11, 3, 8);
        let t = fitness_table(&l, 20).unwrap();
        for beta in [0.0, 0.5, 2.0, 6.0] {
            let g = exact_free_energy(&l, beta).unwrap();
            let m = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = t.iter().map(|h| (beta * (h - m)).exp()).sum();
            let f = (beta * m + z.ln()) / 11.0;
            assert!((g.f - f).abs() < 1e-12);
            let e: f64 = t.iter().map(|h| h * (beta * (h - m)).exp()).sum::<f64>() / z / 11.0;
            assert!((g.mean_energy - e).abs() < 1e-12);
            let p2: f64 = t.iter().map(|h| ((beta * (h - m)).exp() / z).powi(2)).sum();
            assert!((g.p_q1 - p2).abs() < 1e-12);
        }
        assert!((exact_free_energy(&l, 0.0).unwrap().f - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(exact_free_energy(&l, -1.0).is_err());
    }

    #[test]
    fn census_certificates() {
        let l = land(12, 4, 21);
        let lm = Scanner::default().local_maxima_census(&l, 1000).unwrap();
        assert!(lm.count >= 1);
        assert_eq!(lm.examples.len() as u64, lm.count.min(1000));
        for g in &lm.examples {
            for j in 0..12 {
                assert!(l.delta_fitness(g, j).unwrap() <= 0.0);
            }
        }
    }

    #[test]
    fn packing() {
        let l = land(14, 12, 3);
        let gs = ground_state(&l).unwrap();
        let single = peak_packing(&l, 0.0, 0.5).unwrap();
        assert_eq!(single, vec![gs.sigma_star]);
        let s = peak_packing(&l, 0.6, 0.5).unwrap();
        assert_eq!(s[0], gs.sigma_star);
        for a in &s {
            assert!(l.norm_fitness(a).unwrap() >= gs.m - 0.6);
            for b in &s {
                if a != b {
                    assert!(crate::landscape::overlap_q(a, b, 12).unwrap().is_zero());
                    let r = crate::landscape::overlap_r(a, b).unwrap();
                    assert!((r.numerator.abs() as f64) < 0.5 * 14.0);
                }
            }
        }
    }

    #[test]
    fn limits_are_errors() {
        let l = Landscape::new(LandscapeSpec::with_k(30, 2, 1).unwrap()).unwrap();
        assert!(matches!(
            ground_state(&l),
            Err(NkError::ScanLimit { n: 30, limit: 26 })
        ));
        let tight = Scanner::new(ScanLimits { single: 8, pair: 4 });
        assert!(tight.exact_free_energy(&land(9, 1, 1), 1.0).is_err());
    }
}
