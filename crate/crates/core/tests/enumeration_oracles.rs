//! Gray-code scans against plain loops over every genome.

use nk_core::enumeration::{ConstraintSet, Scanner};
use nk_core::landscape::{overlap_q, overlap_r, CacheMode, Genome, Landscape, LandscapeSpec};

fn all(land: &Landscape) -> Vec<f64> {
    let n = land.n();
    (0..1u64 << n)
        .map(|b| land.fitness(&Genome::from_bits(n, b).unwrap()).unwrap())
        .collect()
}

fn landscapes() -> Vec<Landscape> {
    let mut out = Vec::new();
    for (n, k, seed) in [
        (1, 0, 1),
        (2, 1, 2),
        (5, 0, 3),
        (7, 3, 4),
        (9, 8, 5),
        (11, 2, 6),
        (12, 5, 7),
    ] {
        for mode in [CacheMode::Hashed, CacheMode::Table] {
            let spec = LandscapeSpec::with_k(n, k, seed)
                .unwrap()
                .cache(mode)
                .unwrap();
            out.push(Landscape::new(spec).unwrap());
        }
    }
    out
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[test]
fn ground_state_and_level_sets() {
    let sc = Scanner::default();
    for land in landscapes() {
        let h = all(&land);
        let nf = land.n() as f64;
        let max = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gs = sc.ground_state(&land).unwrap();
        assert!((gs.m * nf - max).abs() < 1e-9);
        assert_eq!(land.fitness(&gs.sigma_star).unwrap(), max);
        for s in [-0.5, 0.0, 0.3, gs.m - 0.1] {
            let naive = h.iter().filter(|&&x| x / nf >= s).count() as u64;
            assert_eq!(sc.level_set_count(&land, s).unwrap(), naive, "s = {s}");
        }
        assert_eq!(
            sc.level_set_count(&land, f64::NEG_INFINITY).unwrap(),
            h.len() as u64
        );
    }
}

#[test]
fn free_energy_and_moments() {
    let sc = Scanner::default();
    for land in landscapes() {
        let h = all(&land);
        let nf = land.n() as f64;
        for beta in [0.0, 0.4, 1.3, 5.0] {
            let g = sc.exact_free_energy(&land, beta).unwrap();
            let ln_z = log_sum_exp(h.iter().map(|x| beta * x));
            assert!((g.f - ln_z / nf).abs() < 1e-12);
            let p: Vec<f64> = h.iter().map(|x| (beta * x - ln_z).exp()).collect();
            let u: f64 = p.iter().zip(&h).map(|(p, h)| p * h).sum::<f64>() / nf;
            assert!((g.mean_energy - u).abs() < 1e-11);
            let sq: f64 = p.iter().map(|x| x * x).sum();
            assert!((g.p_q1 - sq).abs() < 1e-12);
        }
    }
}

#[test]
fn local_maxima_by_neighbours() {
    let sc = Scanner::default();
    for land in landscapes() {
        let n = land.n();
        let h = all(&land);
        let naive = (0..h.len())
            .filter(|&b| (0..n).all(|j| h[b ^ (1 << j)] <= h[b]))
            .count() as u64;
        let census = sc.local_maxima_census(&land, 3).unwrap();
        assert_eq!(census.count, naive);
        for g in &census.examples {
            assert!((0..n).all(|j| land.delta_fitness(g, j).unwrap() <= 0.0));
        }
    }
}

#[test]
fn overlap_law_against_double_loop() {
    let sc = Scanner::default();
    for land in landscapes().into_iter().filter(|l| l.n() <= 9) {
        let n = land.n();
        let h = all(&land);
        for beta in [0.0, 0.8, 2.5] {
            let ln_z = log_sum_exp(h.iter().map(|x| beta * x));
            let p: Vec<f64> = h.iter().map(|x| (beta * x - ln_z).exp()).collect();
            let mut q_mass = vec![0.0; n + 1];
            let mut r_mean = 0.0;
            for a in 0..h.len() {
                let ga = Genome::from_bits(n, a as u64).unwrap();
                for b in 0..h.len() {
                    let gb = Genome::from_bits(n, b as u64).unwrap();
                    let w = p[a] * p[b];
                    q_mass[overlap_q(&ga, &gb, land.k()).unwrap().numerator as usize] += w;
                    r_mean += w * overlap_r(&ga, &gb).unwrap().as_f64();
                }
            }
            let law = sc
                .exact_overlap_law(&land, beta)
                .unwrap()
                .overlap_law
                .unwrap();
            for (q, m) in q_mass.iter().enumerate() {
                assert!(
                    (law.mass_q(q as u32) - m).abs() < 1e-12,
                    "N={n} beta={beta} q={q}"
                );
            }
            assert!((law.mean_r() - r_mean).abs() < 1e-12);
        }
    }
}

#[test]
fn coupled_max_against_double_loop() {
    let sc = Scanner::default();
    for land in landscapes()
        .into_iter()
        .filter(|l| (3..=9).contains(&l.n()))
    {
        let n = land.n();
        let h = all(&land);
        let sets = [
            ConstraintSet::all(n),
            ConstraintSet::q_strictly_between(n),
            ConstraintSet::r_between(n, 0.3).unwrap(),
        ];
        for set in &sets {
            let mut best = f64::NEG_INFINITY;
            for a in 0..h.len() {
                let ga = Genome::from_bits(n, a as u64).unwrap();
                for b in 0..h.len() {
                    let gb = Genome::from_bits(n, b as u64).unwrap();
                    let q = overlap_q(&ga, &gb, land.k()).unwrap().numerator as u32;
                    let r = overlap_r(&ga, &gb).unwrap().numerator as i32;
                    if set.contains(q, r) {
                        best = best.max(h[a] + h[b]);
                    }
                }
            }
            match sc.coupled_max(&land, set) {
                Ok(c) => {
                    assert!((c.value * n as f64 - best).abs() < 1e-9, "{}", set.label);
                    let q = overlap_q(&c.first, &c.second, land.k()).unwrap().numerator as u32;
                    let r = overlap_r(&c.first, &c.second).unwrap().numerator as i32;
                    assert!(set.contains(q, r));
                }
                Err(_) => assert_eq!(best, f64::NEG_INFINITY, "{}", set.label),
            }
        }
    }
}

#[test]
fn scan_limits_are_enforced() {
    let land = Landscape::new(LandscapeSpec::with_k(30, 2, 1).unwrap()).unwrap();
    assert!(Scanner::default().ground_state(&land).is_err());
    let land = Landscape::new(LandscapeSpec::with_k(15, 2, 1).unwrap()).unwrap();
    assert!(Scanner::default().exact_overlap_law(&land, 1.0).is_err());
}
