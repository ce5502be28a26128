//! Pair quantities through the XOR bijection `sigma2 = sigma1 ^ d`.
//!
//! Both overlaps of a pair depend only on the disagreement mask `d`, so every
//! pair sum factors into a sum over `d` of a per-mask quantity.

use rayon::prelude::*;
use serde::Serialize;

use super::{fitness_table, ConstraintSet, Gibbs, Scanner};
use crate::error::{NkError, Result};
use crate::landscape::{epistatic_count, low_mask, Genome, Landscape};

/// Exact `(N Q, N R)` of a pair with disagreement mask `d`.
#[inline]
pub(crate) fn mask_class(d: u64, n: usize, k: usize) -> (u32, i32) {
    let agree = !d & low_mask(n);
    (
        epistatic_count(agree, n, k),
        n as i32 - 2 * d.count_ones() as i32,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapMass {
    pub nq: u32,
    pub nr: i32,
    pub p: f64,
}

/// Joint law of `(N Q, N R)` under two independent Gibbs replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapLaw {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    /// Sorted by `(nq, nr)`; zero-mass classes omitted.
    pub entries: Vec<OverlapMass>,
}

impl OverlapLaw {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    pub fn mass_q(&self, nq: u32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.nq == nq)
            .map(|e| e.p)
            .sum()
    }

    pub fn mass_r(&self, nr: i32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.nr == nr)
            .map(|e| e.p)
            .sum()
    }

    pub fn mean_q(&self) -> f64 {
        self.entries.iter().map(|e| e.p * e.nq as f64).sum::<f64>() / self.n as f64
    }

    pub fn mean_r(&self) -> f64 {
        self.entries.iter().map(|e| e.p * e.nr as f64).sum::<f64>() / self.n as f64
    }

    /// Probability of the event `S`.
    pub fn mass(&self, s: &ConstraintSet) -> f64 {
        self.entries
            .iter()
            .filter(|e| s.contains(e.nq, e.nr))
            .map(|e| e.p)
            .sum()
    }
}

/// `W[d] = sum_sigma w[sigma] w[sigma ^ d]` for every mask `d`.
pub fn pair_weights(w: &[f64]) -> Vec<f64> {
    (0..w.len())
        .into_par_iter()
        .map(|d| w.iter().enumerate().map(|(s, &x)| x * w[s ^ d]).sum())
        .collect()
}

fn gibbs_weights(table: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let m = table.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = table.iter().map(|h| (beta * (h - m)).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    (p, beta * m + z.ln())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoupledMax {
    /// `max (H(sigma1) + H(sigma2)) / N` over pairs in the set.
    pub value: f64,
    pub first: Genome,
    pub second: Genome,
}

impl Scanner {
    pub fn exact_overlap_law(&self, land: &Landscape, beta: f64) -> Result<Gibbs> {
        let (n, k) = (land.n(), land.k());
        self.limits.check_pair(n)?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(NkError::Domain(format!(
                "beta = {beta} must be finite and >= 0"
            )));
        }
        let table = fitness_table(land, self.limits.pair)?;
        let (p, ln_z) = gibbs_weights(&table, beta);
        let w = pair_weights(&p);
        let mut bins = std::collections::BTreeMap::<(u32, i32), f64>::new();
        for (d, &x) in w.iter().enumerate() {
            *bins.entry(mask_class(d as u64, n, k)).or_default() += x;
        }
        let nf = n as f64;
        let mean_energy = p.iter().zip(&table).map(|(a, h)| a * h).sum::<f64>() / nf;
        Ok(Gibbs {
            beta,
            f: ln_z / nf,
            mean_energy,
            p_q1: w[0],
            overlap_law: Some(OverlapLaw {
                n,
                k,
                beta,
                entries: bins
                    .into_iter()
                    .filter(|&(_, p)| p > 0.0)
                    .map(|((nq, nr), p)| OverlapMass { nq, nr, p })
                    .collect(),
            }),
        })
    }

    fn allowed_masks(&self, land: &Landscape, s: &ConstraintSet) -> Result<Vec<u64>> {
        let (n, k) = (land.n(), land.k());
        if s.n != n {
            return Err(NkError::LengthMismatch {
                expected: n,
                got: s.n,
            });
        }
        let masks: Vec<u64> = (0..1u64 << n)
            .filter(|&d| {
                let (q, r) = mask_class(d, n, k);
                s.contains(q, r)
            })
            .collect();
        if masks.is_empty() {
            return Err(NkError::EmptyConstraint(n));
        }
        Ok(masks)
    }

    /// Coupled maximum over pairs whose overlaps lie in `s`; ties go to the
    /// smallest `(sigma1, sigma2)`.
    pub fn coupled_max(&self, land: &Landscape, s: &ConstraintSet) -> Result<CoupledMax> {
        let n = land.n();
        self.limits.check_pair(n)?;
        let masks = self.allowed_masks(land, s)?;
        let table = fitness_table(land, self.limits.pair)?;
        let better = |a: (f64, u64, u64), b: (f64, u64, u64)| {
            if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                b
            } else {
                a
            }
        };
        let chunk = 256usize.min(table.len());
        let best = (0..table.len() / chunk)
            .into_par_iter()
            .map(|c| {
                let mut best = (f64::NEG_INFINITY, u64::MAX, u64::MAX);
                for s1 in c * chunk..(c + 1) * chunk {
                    let h1 = table[s1];
                    for &d in &masks {
                        let s2 = s1 ^ d as usize;
                        best = better(best, (h1 + table[s2], s1 as u64, s2 as u64));
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::NEG_INFINITY, u64::MAX, u64::MAX), better);
        Ok(CoupledMax {
            value: best.0 / n as f64,
            first: Genome::from_bits(n, best.1)?,
            second: Genome::from_bits(n, best.2)?,
        })
    }

    /// `(1/N) ln sum_{(sigma1, sigma2) in s} e^{beta (H(sigma1) + H(sigma2))}`.
    pub fn constrained_free_energy(
        &self,
        land: &Landscape,
        s: &ConstraintSet,
        beta: f64,
    ) -> Result<f64> {
        let n = land.n();
        self.limits.check_pair(n)?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(NkError::Domain(format!(
                "beta = {beta} must be finite and >= 0"
            )));
        }
        let masks = self.allowed_masks(land, s)?;
        let table = fitness_table(land, self.limits.pair)?;
        let (p, ln_z) = gibbs_weights(&table, beta);
        let inside: f64 = masks
            .par_iter()
            .map(|&d| {
                p.iter()
                    .enumerate()
                    .map(|(s1, &x)| x * p[s1 ^ d as usize])
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        Ok((2.0 * ln_z + inside.ln()) / n as f64)
    }
}

pub fn exact_overlap_law(land: &Landscape, beta: f64) -> Result<Gibbs> {
    Scanner::default().exact_overlap_law(land, beta)
}

pub fn coupled_max(land: &Landscape, s: &ConstraintSet) -> Result<CoupledMax> {
    Scanner::default().coupled_max(land, s)
}

pub fn constrained_free_energy(land: &Landscape, s: &ConstraintSet, beta: f64) -> Result<f64> {
    Scanner::default().constrained_free_energy(land, s, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;
    use crate::enumeration::{exact_free_energy, ground_state};
    use crate::landscape::{overlap_q, overlap_r, CacheMode, LandscapeSpec};
    use num_traits::ToPrimitive;

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
    fn law_matches_plain_double_loop() {
        let l = land(8, 2, 17);
        let beta = 1.3;
        let law = exact_overlap_law(&l, beta).unwrap().overlap_law.unwrap();
        let t = fitness_table(&l, 20).unwrap();
        let (p, _) = gibbs_weights(&t, beta);
        let mut direct = std::collections::BTreeMap::<(i64, i64), f64>::new();
        for a in 0..256u64 {
            for b in 0..256u64 {
                let (ga, gb) = (
                    Genome::from_bits(8, a).unwrap(),
                    Genome::from_bits(8, b).unwrap(),
                );
                let q = overlap_q(&ga, &gb, 2).unwrap().numerator;
                let r = overlap_r(&ga, &gb).unwrap().numerator;
                *direct.entry((q, r)).or_default() += p[a as usize] * p[b as usize];
            }
        }
        assert_eq!(direct.len(), law.entries.len());
        for e in &law.entries {
            assert!((direct[&(e.nq as i64, e.nr as i64)] - e.p).abs() < 1e-15);
        }
        assert!((law.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_temperature_law_is_binomial() {
        let l = land(10, 3, 2);
        let law = exact_overlap_law(&l, 0.0).unwrap().overlap_law.unwrap();
        for m in 0..=10 {
            let want = binomial(10, m).to_f64().unwrap() / 1024.0;
            assert!((law.mass_r(10 - 2 * m as i32) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn replica_q1_is_collision_probability() {
        let l = land(10, 9, 6);
        let g = exact_overlap_law(&l, 2.0).unwrap();
        let law = g.overlap_law.as_ref().unwrap();
        assert!((law.mass_q(10) - g.p_q1).abs() < 1e-12);
        assert!((law.mass_q(0) + law.mass_q(10) - 1.0).abs() < 1e-12);
        let single = exact_free_energy(&l, 2.0).unwrap();
        assert!((single.p_q1 - g.p_q1).abs() < 1e-12);
        assert!((single.f - g.f).abs() < 1e-12);
    }

    #[test]
    fn coupled_max_trivial_sets() {
        let l = land(10, 4, 12);
        let m = ground_state(&l).unwrap().m;
        for s in [ConstraintSet::all(10), ConstraintSet::q_one(10)] {
            let c = coupled_max(&l, &s).unwrap();
            assert_eq!(c.value, 2.0 * m);
            assert_eq!(c.first, c.second);
        }
        let c = coupled_max(&l, &ConstraintSet::q_strictly_between(10)).unwrap();
        assert!(c.value < 2.0 * m);
        let q = overlap_q(&c.first, &c.second, 4).unwrap().numerator;
        assert!(q > 0 && q < 10);
    }

    #[test]
    fn constrained_free_energy_sandwich() {
        let l = land(10, 6, 3);
        let s = ConstraintSet::q_strictly_between(10);
        let mbar = coupled_max(&l, &s).unwrap().value;
        for beta in [0.5, 1.0, 3.0, 10.0] {
            let f = constrained_free_energy(&l, &s, beta).unwrap();
            assert!(mbar <= f / beta + 1e-12);
            assert!(f / beta <= mbar + 2.0 * std::f64::consts::LN_2 / beta + 1e-12);
        }
        let all = constrained_free_energy(&l, &ConstraintSet::all(10), 1.0).unwrap();
        assert!((all - 2.0 * exact_free_energy(&l, 1.0).unwrap().f).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatched_sets() {
        let l = land(6, 5, 1);
        // with K = N-1 no pair has 0 < Q < 1
        assert!(matches!(
            coupled_max(&l, &ConstraintSet::q_strictly_between(6)),
            Err(NkError::EmptyConstraint(6))
        ));
        assert!(coupled_max(&l, &ConstraintSet::all(7)).is_err());
        assert!(exact_overlap_law(&land(15, 2, 1), 1.0).is_err());
    }
}
