use nk_core::landscape::{overlap_q, overlap_r, Genome, Landscape, LandscapeSpec};
use nk_core::paths::{adaptive_walk, build_bridge, path_report, verify_theorem_bounds, WalkRule};
use nk_core::rng::CounterRng;
use proptest::prelude::*;

proptest! {
    #[test]
    fn bridge_structure(n in 11usize..=64, steps in 1usize..=10, a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (Genome::from_bits(n, a & mask(n)).unwrap(), Genome::from_bits(n, b & mask(n)).unwrap());
        let p = build_bridge(&x, &y, steps).unwrap();
        prop_assert_eq!(p.nodes.first(), Some(&x));
        prop_assert_eq!(p.nodes.last(), Some(&y));
        // blocks tile the genome
        let covered: usize = p.blocks.iter().map(|b| b.len()).sum();
        prop_assert_eq!(covered, n);
        for w in p.nodes.windows(2) {
            let d = w[0].hamming(&w[1]) as usize;
            prop_assert!(d <= p.blocks.last().unwrap().len());
        }
        // every node agrees with one endpoint at each locus
        for g in &p.nodes {
            for i in 0..n {
                prop_assert!(g.bit(i) == x.bit(i) || g.bit(i) == y.bit(i));
            }
        }
    }
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

#[test]
fn report_matches_direct_overlaps() {
    let land = Landscape::new(LandscapeSpec::with_k(24, 2, 4).unwrap()).unwrap();
    let mut rng = CounterRng::new(8, &[]);
    let a = Genome::random(24, &mut rng).unwrap();
    let b = Genome::random(24, &mut rng).unwrap();
    let p = build_bridge(&a, &b, 11).unwrap();
    let r = path_report(&land, &p).unwrap();
    for (s, w) in r.steps.iter().zip(p.nodes.windows(2)) {
        assert_eq!(s.nq, overlap_q(&w[0], &w[1], 2).unwrap().numerator);
        assert_eq!(s.nr, overlap_r(&w[0], &w[1]).unwrap().numerator);
    }
    assert_eq!(r.fitness.len(), 12);
    // N = 24 = 2 * 12: equal blocks, so the uniform bounds hold
    let f = verify_theorem_bounds(&r, 2.0 / 24.0, 11, 0.2, 1.0);
    assert!(f.q_ok && f.r_ok && f.block_q_ok && f.block_r_ok);
}

#[test]
fn uneven_last_block_can_break_the_uniform_r_bound() {
    // N = 32, n = 10: k = 2 and the last block has 14 loci
    let a = Genome::zeros(32).unwrap();
    let b = Genome::ones(32).unwrap();
    let land = Landscape::new(LandscapeSpec::with_k(32, 1, 1).unwrap()).unwrap();
    let r = path_report(&land, &build_bridge(&a, &b, 10).unwrap()).unwrap();
    let f = verify_theorem_bounds(&r, 1.0 / 32.0, 10, 0.2, 0.0);
    assert_eq!(r.min_r, 0.125);
    assert!(!f.r_ok);
    assert!(f.block_r_ok && f.block_q_ok);
}

#[test]
fn walks_end_at_local_maxima() {
    let land = Landscape::new(LandscapeSpec::with_k(20, 4, 2).unwrap()).unwrap();
    let mut rng = CounterRng::new(3, &[]);
    for i in 0..10 {
        let start = Genome::random(20, &mut rng).unwrap();
        let rule = if i % 2 == 0 {
            WalkRule::Steepest
        } else {
            WalkRule::RandomImproving { rng_seed: i }
        };
        let w = adaptive_walk(&land, &start, rule).unwrap();
        assert_eq!(w.flips.len() + 1, w.trace.len());
        assert!((0..20).all(|j| land.delta_fitness(&w.end, j).unwrap() <= 0.0));
    }
}
