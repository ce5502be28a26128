//! Sampler estimates against exhaustive enumeration.

use nk_core::enumeration::Scanner;
use nk_core::landscape::{Landscape, LandscapeSpec};
use nk_core::sampler::{
    estimate_max, free_energy_ti, metropolis_chain, parallel_tempering, replica_overlap_stats,
    ChainConfig, Effort,
};

fn land(n: usize, k: usize, seed: u64) -> Landscape {
    Landscape::new(
        LandscapeSpec::with_k(n, k, seed)
            .unwrap()
            .auto_cache(1 << 20),
    )
    .unwrap()
}

#[test]
fn free_energy_and_energy() {
    for (n, k, seed, beta) in [(10, 2, 1, 0.7), (12, 5, 2, 1.6)] {
        let l = land(n, k, seed);
        let exact = Scanner::default().exact_free_energy(&l, beta).unwrap();
        let est = free_energy_ti(&l, beta, 0.05, &Effort::new(16, 1500, seed)).unwrap();
        assert!(
            est.f.agrees_with(exact.f, 4.0),
            "{:?} vs {}",
            est.f,
            exact.f
        );
        assert!(est.mean_energy.agrees_with(exact.mean_energy, 4.0));
    }
}

#[test]
fn replica_overlap() {
    let l = land(10, 3, 5);
    let exact = Scanner::default().exact_overlap_law(&l, 1.2).unwrap();
    let r = replica_overlap_stats(&l, 1.2, 0.05, &Effort::new(32, 1500, 9)).unwrap();
    assert!(r.p_q1.agrees_with(exact.p_q1, 4.0));
    let law = exact.overlap_law.unwrap();
    assert!(r.mean_q.agrees_with(law.mean_q(), 4.0));
}

#[test]
fn maximum_is_found_and_never_exceeded() {
    for seed in 0..5 {
        let l = land(14, 4, seed);
        let gs = Scanner::default().ground_state(&l).unwrap();
        let est = estimate_max(&l, &Effort::new(4, 300, seed)).unwrap();
        assert_eq!(est.m, gs.m);
        assert!(est.per_chain.iter().all(|&m| m <= gs.m));
    }
}

#[test]
fn chains_replay_bit_for_bit() {
    let l = land(16, 2, 3);
    let cfg = ChainConfig::ladder(vec![0.5, 1.0, 2.0], 16 * 200, 11).record_states(true);
    let a = parallel_tempering(&l, &cfg, 4).unwrap();
    let b = parallel_tempering(&l, &cfg, 4).unwrap();
    for (x, y) in a.traces.iter().zip(&b.traces) {
        assert_eq!(x.energies, y.energies);
        assert_eq!(x.states, y.states);
    }
    let c = parallel_tempering(&l, &cfg, 5).unwrap();
    assert_ne!(a.traces[0].states, c.traces[0].states);
}

#[test]
fn infinite_temperature_accepts_everything() {
    let l = land(12, 3, 1);
    let run = metropolis_chain(&l, &ChainConfig::single(0.0, 12 * 100, 2), 0).unwrap();
    assert_eq!(run.traces[0].acceptance(), 1.0);
}
