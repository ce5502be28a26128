//! Bridge paths between two genomes and adaptive walks.
//!
//! A bridge of `n` steps rewrites consecutive blocks of `k = floor(N/(n+1))`
//! loci from the start genome to the target genome; the last block takes
//! every remaining locus.

use std::ops::Range;

use serde::Serialize;

use crate::error::{NkError, Result};
use crate::landscape::{overlap_q, overlap_r, Genome, Landscape};
use crate::rng::CounterRng;
use crate::theory::beta_c;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgePath {
    pub steps: usize,
    pub block: usize,
    /// `steps + 1` genomes from start to target.
    pub nodes: Vec<Genome>,
    /// Locus block rewritten at each step, in the order applied.
    pub blocks: Vec<Range<usize>>,
}

fn block_ranges(len: usize, steps: usize) -> Result<(usize, Vec<Range<usize>>)> {
    if steps == 0 {
        return Err(NkError::Domain("a bridge needs at least one step".into()));
    }
    let k = len / (steps + 1);
    if k == 0 {
        return Err(NkError::Domain(format!(
            "N = {len} is too short for {steps} steps (need N >= steps + 1)"
        )));
    }
    let blocks = (0..steps)
        .map(|l| l * k..if l + 1 == steps { len } else { (l + 1) * k })
        .collect();
    Ok((k, blocks))
}

/// Bridge with blocks applied in ascending order.
pub fn build_bridge(start: &Genome, target: &Genome, steps: usize) -> Result<BridgePath> {
    let order: Vec<usize> = (0..steps).collect();
    build_bridge_ordered(start, target, steps, &order)
}

/// Bridge applying block `order[l]` at step `l`; `order` must be a
/// permutation of `0..steps`.
pub fn build_bridge_ordered(
    start: &Genome,
    target: &Genome,
    steps: usize,
    order: &[usize],
) -> Result<BridgePath> {
    target.check_len(start.len())?;
    let (k, ranges) = block_ranges(start.len(), steps)?;
    let mut seen = vec![false; steps];
    if order.len() != steps
        || order
            .iter()
            .any(|&b| b >= steps || std::mem::replace(&mut seen[b], true))
    {
        return Err(NkError::Domain(format!(
            "block order {order:?} is not a permutation of 0..{steps}"
        )));
    }
    let mut nodes = vec![*start];
    let mut bits = start.bits();
    let mut blocks = Vec::with_capacity(steps);
    for &b in order {
        let r = ranges[b].clone();
        let mask = r.clone().fold(0u64, |m, i| m | 1 << i);
        bits = (bits & !mask) | (target.bits() & mask);
        nodes.push(Genome::from_bits(start.len(), bits)?);
        blocks.push(r);
    }
    Ok(BridgePath {
        steps,
        block: k,
        nodes,
        blocks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PathStep {
    pub l: usize,
    pub nq: i64,
    pub nr: i64,
    pub q: f64,
    pub r: f64,
    /// Loci that actually change at this step.
    pub flips: u32,
    pub block_len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub n: usize,
    pub k: usize,
    pub steps: Vec<PathStep>,
    /// `H / N` at every node.
    pub fitness: Vec<f64>,
    pub min_q: f64,
    pub min_r: f64,
    /// Over nodes `1..steps`; `None` for a one-step path.
    pub min_interior_fitness: Option<f64>,
    pub min_endpoint_fitness: f64,
}

pub fn path_report(land: &Landscape, path: &BridgePath) -> Result<PathReport> {
    let n = land.n();
    let k = land.k();
    let fitness = path
        .nodes
        .iter()
        .map(|g| land.norm_fitness(g))
        .collect::<Result<Vec<_>>>()?;
    let steps = path
        .nodes
        .windows(2)
        .zip(&path.blocks)
        .enumerate()
        .map(|(l, (w, b))| {
            let q = overlap_q(&w[0], &w[1], k)?;
            let r = overlap_r(&w[0], &w[1])?;
            Ok(PathStep {
                l,
                nq: q.numerator,
                nr: r.numerator,
                q: q.as_f64(),
                r: r.as_f64(),
                flips: w[0].hamming(&w[1]),
                block_len: b.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = fitness.len() - 1;
    let interior = &fitness[1..last];
    Ok(PathReport {
        n,
        k,
        min_q: steps.iter().map(|s| s.q).fold(f64::INFINITY, f64::min),
        min_r: steps.iter().map(|s| s.r).fold(f64::INFINITY, f64::min),
        min_interior_fitness: (!interior.is_empty())
            .then(|| interior.iter().cloned().fold(f64::INFINITY, f64::min)),
        min_endpoint_fitness: fitness[0].min(fitness[last]),
        steps,
        fitness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundFlags {
    /// `alpha < eta / (5 beta_c)`.
    pub regime: bool,
    pub regime_threshold: f64,
    /// `steps >= 10`.
    pub steps_in_regime: bool,
    /// `M - (8n + 10) eta`.
    pub fitness_floor: f64,
    pub fitness_ok: bool,
    /// `1 - 2/(n+1) - 2 alpha`.
    pub q_bound: f64,
    pub q_ok: bool,
    /// `1 - 4/(n+1)`.
    pub r_bound: f64,
    pub r_ok: bool,
    /// Per-step bounds from the actual block sizes:
    /// `N Q >= N - |I_l| - K` and `N R >= N - 2 |I_l|`.
    pub block_q_ok: bool,
    pub block_r_ok: bool,
}

/// Regime flag `alpha < eta / (5 sqrt(2 ln 2))`.
pub fn path_regime(alpha: f64, eta: f64) -> bool {
    alpha < eta / (5.0 * beta_c())
}

pub fn verify_theorem_bounds(
    report: &PathReport,
    alpha: f64,
    n: usize,
    eta: f64,
    m: f64,
) -> BoundFlags {
    let nf = (n + 1) as f64;
    let fitness_floor = m - (8 * n + 10) as f64 * eta;
    let q_bound = 1.0 - 2.0 / nf - 2.0 * alpha;
    let r_bound = 1.0 - 4.0 / nf;
    let big_n = report.n as i64;
    BoundFlags {
        regime: path_regime(alpha, eta),
        regime_threshold: eta / (5.0 * beta_c()),
        steps_in_regime: n >= 10,
        fitness_floor,
        fitness_ok: report
            .min_interior_fitness
            .is_none_or(|f| f >= fitness_floor),
        q_bound,
        q_ok: report.steps.iter().all(|s| s.q >= q_bound),
        r_bound,
        r_ok: report.steps.iter().all(|s| s.r >= r_bound),
        block_q_ok: report
            .steps
            .iter()
            .all(|s| s.nq >= big_n - s.block_len as i64 - report.k as i64),
        block_r_ok: report
            .steps
            .iter()
            .all(|s| s.nr >= big_n - 2 * s.block_len as i64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WalkRule {
    /// Flip the locus with the largest gain.
    Steepest,
    /// Flip a uniformly chosen improving locus.
    RandomImproving { rng_seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Walk {
    /// `H / N` after each flip, starting with the start genome.
    pub trace: Vec<f64>,
    pub flips: Vec<usize>,
    pub end: Genome,
}

/// Single-flip improving walk until no flip increases `H`.
pub fn adaptive_walk(land: &Landscape, start: &Genome, rule: WalkRule) -> Result<Walk> {
    start.check_len(land.n())?;
    let n = land.n();
    let nf = n as f64;
    let mut bits = start.bits();
    let mut h = land.fitness_bits(bits);
    let mut trace = vec![h / nf];
    let mut flips = Vec::new();
    let mut rng = match rule {
        WalkRule::RandomImproving { rng_seed } => Some(CounterRng::new(rng_seed, &[0x5741_4c4b])),
        WalkRule::Steepest => None,
    };
    loop {
        let gains: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, land.delta_bits(bits, j)))
            .filter(|&(_, d)| d > 0.0)
            .collect();
        if gains.is_empty() {
            break;
        }
        let j = match rng.as_mut() {
            None => {
                gains
                    .iter()
                    .fold(gains[0], |a, &b| if b.1 > a.1 { b } else { a })
                    .0
            }
            Some(r) => gains[r.below(gains.len() as u64) as usize].0,
        };
        bits ^= 1 << j;
        h = land.fitness_bits(bits);
        trace.push(h / nf);
        flips.push(j);
    }
    let _ = h;
    Ok(Walk {
        trace,
        flips,
        end: Genome::from_bits(n, bits)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::ground_state;
    use crate::landscape::{CacheMode, LandscapeSpec};
    use crate::rng::CounterRng;

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
    fn index_audit() {
        let a = Genome::zeros(33).unwrap();
        let b = Genome::ones(33).unwrap();
        let p = build_bridge(&a, &b, 10).unwrap();
        assert_eq!(p.block, 3);
        assert_eq!(p.blocks[9], 27..33);
        assert_eq!(p.nodes.len(), 11);
        assert_eq!(p.nodes[0], a);
        assert_eq!(p.nodes[10], b);
        for i in 0..33 {
            assert_eq!(p.nodes[5].bit(i), i < 15);
        }
        for (l, node) in p.nodes.iter().enumerate().skip(1).take(9) {
            for i in 0..33 {
                assert_eq!(node.bit(i), i < l * 3);
            }
        }
        assert!(build_bridge(&Genome::zeros(10).unwrap(), &Genome::ones(10).unwrap(), 10).is_err());
        assert!(build_bridge(&a, &Genome::ones(32).unwrap(), 3).is_err());
    }

    #[test]
    fn equal_endpoints() {
        let mut rng = CounterRng::new(1, &[]);
        let g = Genome::random(20, &mut rng).unwrap();
        let l = land(20, 2, 1);
        let r = path_report(&l, &build_bridge(&g, &g, 4).unwrap()).unwrap();
        assert!(r
            .steps
            .iter()
            .all(|s| s.q == 1.0 && s.r == 1.0 && s.flips == 0));
    }

    #[test]
    fn block_bounds_always_hold() {
        let mut rng = CounterRng::new(2, &[]);
        for trial in 0..300 {
            let n = 11 + trial % 22;
            let steps = 10.min(n - 1);
            let k = trial % 3;
            let l = land(n, k.min(n - 1), trial as u64);
            let a = Genome::random(n, &mut rng).unwrap();
            let b = Genome::random(n, &mut rng).unwrap();
            let r = path_report(&l, &build_bridge(&a, &b, steps).unwrap()).unwrap();
            let f = verify_theorem_bounds(&r, k as f64 / n as f64, steps, 0.2, 0.0);
            assert!(f.block_q_ok && f.block_r_ok);
            assert!(r.steps.iter().all(|s| s.flips as usize <= s.block_len));
        }
    }

    #[test]
    fn literal_bounds_hold_when_blocks_divide() {
        // N = 22 = 2 * 11, so every block has exactly k = 2 loci
        let mut rng = CounterRng::new(3, &[]);
        let l = land(22, 0, 5);
        for _ in 0..200 {
            let a = Genome::random(22, &mut rng).unwrap();
            let b = Genome::random(22, &mut rng).unwrap();
            let r = path_report(&l, &build_bridge(&a, &b, 10).unwrap()).unwrap();
            let f = verify_theorem_bounds(&r, 0.02, 10, 0.2, 0.0);
            assert!(f.q_ok && f.r_ok);
        }
    }

    #[test]
    fn regime_flag() {
        assert!(path_regime(0.01, 0.2));
        assert!(!path_regime(0.1, 0.2));
        assert!((0.2 / (5.0 * beta_c()) - 0.033_97).abs() < 1e-4);
    }

    #[test]
    fn orders() {
        let a = Genome::zeros(12).unwrap();
        let b = Genome::ones(12).unwrap();
        let p = build_bridge_ordered(&a, &b, 3, &[2, 0, 1]).unwrap();
        assert_eq!(p.blocks[0], 6..12);
        assert_eq!(p.nodes[3], b);
        assert!(build_bridge_ordered(&a, &b, 3, &[0, 0, 1]).is_err());
    }

    #[test]
    fn walks() {
        let l = land(12, 3, 7);
        let mut rng = CounterRng::new(4, &[]);
        for rule in [
            WalkRule::Steepest,
            WalkRule::RandomImproving { rng_seed: 3 },
        ] {
            let start = Genome::random(12, &mut rng).unwrap();
            let w = adaptive_walk(&l, &start, rule).unwrap();
            assert!(w.trace.windows(2).all(|p| p[1] > p[0]));
            for j in 0..12 {
                assert!(l.delta_fitness(&w.end, j).unwrap() <= 0.0);
            }
        }
        let flat = land(9, 0, 2);
        let m = ground_state(&flat).unwrap();
        let w = adaptive_walk(&flat, &Genome::zeros(9).unwrap(), WalkRule::Steepest).unwrap();
        assert_eq!(w.end, m.sigma_star);
    }
}
