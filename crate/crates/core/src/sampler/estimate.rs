//! Estimates with error bars from independent chains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{run_ladder, BestHook, ChainConfig};
use crate::error::{NkError, Result};
use crate::landscape::{epistatic_count, low_mask, Genome, Landscape, LandscapeSpec};
use crate::rng::SeedRange;

/// Mean with standard error over independent replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Integrated autocorrelation time (in sweeps) of the first chain, when
    /// the estimate comes from time series.
    pub tau_int: Option<f64>,
}

impl EstimateWithError {
    /// Sample mean and `sd / sqrt(m)`.
    pub fn from_replicates(xs: &[f64]) -> Self {
        let m = xs.len();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let se = if m > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64 / m as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            value: mean,
            std_error: se,
            n_samples: m,
            tau_int: None,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau_int = Some(tau);
        self
    }

    /// `|value - target| <= z * std_error`.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.value - target).abs() <= z * self.std_error
    }
}

/// Integrated autocorrelation time with Sokal's automatic window (`c = 6`).
pub fn tau_int(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c0 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c = (0..n - lag)
            .map(|i| (xs[i] - mean) * (xs[i + lag] - mean))
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Independent-chain budget. Chains are keyed `0..chains` under `rng_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effort {
    pub chains: usize,
    pub sweeps: u64,
    pub burn_in_sweeps: u64,
    pub rng_seed: u64,
}

impl Effort {
    pub fn new(chains: usize, sweeps: u64, rng_seed: u64) -> Self {
        Self {
            chains,
            sweeps,
            burn_in_sweeps: sweeps / 4,
            rng_seed,
        }
    }

    fn config(&self, betas: Vec<f64>, n: usize) -> ChainConfig {
        let n = n as u64;
        ChainConfig::ladder(betas, self.sweeps * n, self.rng_seed).burn_in(self.burn_in_sweeps * n)
    }

    fn check(&self, min_chains: usize) -> Result<()> {
        if self.chains < min_chains {
            return Err(NkError::Chain(format!(
                "need at least {min_chains} independent chains, got {}",
                self.chains
            )));
        }
        Ok(())
    }
}

pub const MIN_CHAINS: usize = 8;

/// `0 = b_0 < ... < b_m = beta` with spacing at most `step`.
pub fn beta_grid(beta: f64, step: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta.is_finite()) || !(step > 0.0 && step <= 0.1) {
        return Err(NkError::Domain(format!(
            "need beta > 0 and 0 < step <= 0.1, got beta = {beta}, step = {step}"
        )));
    }
    let m = (beta / step - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=m).map(|j| beta * j as f64 / m as f64).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyEstimate {
    pub beta: f64,
    pub f: EstimateWithError,
    /// `<H>_beta / N` at the top of the grid.
    pub mean_energy: EstimateWithError,
    pub grid: Vec<f64>,
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

/// `F(beta) = ln 2 + int_0^beta <H>_b / N db` on one landscape.
///
/// Each chain runs parallel tempering on the integration grid and applies the
/// trapezoid rule with the Euler-Maclaurin end correction
/// `-(h^2/12) (u'(beta) - u'(0))`, where `u'(b) = N Var_b(H/N)` is read off
/// the same samples. The error bar is over chains.
pub fn free_energy_ti(
    land: &Landscape,
    beta: f64,
    step: f64,
    effort: &Effort,
) -> Result<FreeEnergyEstimate> {
    effort.check(MIN_CHAINS)?;
    let ln2 = std::f64::consts::LN_2;
    if beta == 0.0 {
        let exact = EstimateWithError {
            value: ln2,
            std_error: 0.0,
            n_samples: effort.chains,
            tau_int: None,
        };
        return Ok(FreeEnergyEstimate {
            beta,
            f: exact,
            mean_energy: exact_uniform_energy(land, effort)?,
            grid: vec![0.0],
        });
    }
    let grid = beta_grid(beta, step)?;
    let cfg = effort.config(grid.clone(), land.n());
    let nf = land.n() as f64;
    let per_chain: Vec<(f64, f64, f64)> = (0..effort.chains as u64)
        .into_par_iter()
        .map(|c| {
            let run = run_ladder(land, &cfg, c, &mut ())?;
            let u: Vec<f64> = run.traces.iter().map(|t| t.mean_energy()).collect();
            let h = grid[1] - grid[0];
            let trap = h * (u.iter().sum::<f64>() - 0.5 * (u[0] + u[u.len() - 1]));
            let du0 = nf * variance(&run.traces[0].energies);
            let du1 = nf * variance(&run.traces[u.len() - 1].energies);
            let f = ln2 + trap - h * h / 12.0 * (du1 - du0);
            Ok((
                f,
                u[u.len() - 1],
                tau_int(&run.traces[u.len() - 1].energies),
            ))
        })
        .collect::<Result<_>>()?;
    let fs: Vec<f64> = per_chain.iter().map(|p| p.0).collect();
    let es: Vec<f64> = per_chain.iter().map(|p| p.1).collect();
    Ok(FreeEnergyEstimate {
        beta,
        f: EstimateWithError::from_replicates(&fs),
        mean_energy: EstimateWithError::from_replicates(&es).with_tau(per_chain[0].2),
        grid,
    })
}

fn exact_uniform_energy(land: &Landscape, effort: &Effort) -> Result<EstimateWithError> {
    let cfg = effort.config(vec![0.0], land.n());
    let means: Vec<f64> = (0..effort.chains as u64)
        .into_par_iter()
        .map(|c| Ok(run_ladder(land, &cfg, c, &mut ())?.traces[0].mean_energy()))
        .collect::<Result<_>>()?;
    Ok(EstimateWithError::from_replicates(&means))
}

/// `<H>_beta / N` on one landscape, from tempering chains on the grid
/// `step, 2 step, ..., beta`.
pub fn mean_energy(
    land: &Landscape,
    beta: f64,
    step: f64,
    effort: &Effort,
) -> Result<EstimateWithError> {
    Ok(free_energy_ti(land, beta, step, effort)?.mean_energy)
}

/// Disorder average of the free energy over `seeds` instances of `spec`.
///
/// Each instance gets its own thermodynamic-integration estimate; the error
/// bar is the spread over instances.
pub fn estimate_free_energy(
    spec: &LandscapeSpec,
    beta: f64,
    seeds: SeedRange,
    step: f64,
    effort: &Effort,
) -> Result<EstimateWithError> {
    if seeds.count < 2 {
        return Err(NkError::Chain("need at least 2 disorder seeds".into()));
    }
    let values: Vec<f64> = seeds
        .seeds()
        .map(|s| {
            let land = Landscape::new(spec.with_seed(s).auto_cache(1 << 22))?;
            Ok(free_energy_ti(&land, beta, step, effort)?.f.value)
        })
        .collect::<Result<_>>()?;
    Ok(EstimateWithError::from_replicates(&values))
}

/// Steepest ascent by single flips to a 1-flip local maximum.
pub(crate) fn polish(land: &Landscape, mut bits: u64) -> (u64, f64) {
    let n = land.n();
    loop {
        let mut best = (0.0, usize::MAX);
        for j in 0..n {
            let d = land.delta_bits(bits, j);
            if d > best.0 {
                best = (d, j);
            }
        }
        if best.1 == usize::MAX {
            return (bits, land.fitness_bits(bits));
        }
        bits ^= 1 << best.1;
    }
}

struct Polisher<'a> {
    land: &'a Landscape,
    raw: f64,
    best: (u64, f64),
}

impl BestHook for Polisher<'_> {
    fn improved(&mut self, bits: u64, h: f64) {
        if h <= self.raw {
            return;
        }
        self.raw = h;
        let (b, v) = polish(self.land, bits);
        if v > self.best.1 || (v == self.best.1 && b < self.best.0) {
            self.best = (b, v);
        }
    }
}

/// Inverse temperatures used by the maximum search.
pub const MAX_LADDER: [f64; 10] = [0.2, 0.35, 0.5, 0.7, 0.9, 1.2, 1.6, 2.2, 3.0, 4.0];

#[derive(Debug, Clone, Serialize)]
pub struct MaxEstimate {
    /// Best `H / N` found; a lower bound on `M`.
    pub m: f64,
    pub genome: Genome,
    /// Best `H / N` per chain.
    pub per_chain: Vec<f64>,
}

/// Lower bound on `M` from tempering chains whose every new best is polished
/// to a local maximum. Longer or more chains never give a smaller value.
pub fn estimate_max(land: &Landscape, effort: &Effort) -> Result<MaxEstimate> {
    effort.check(1)?;
    let n = land.n();
    let cfg = effort.config(MAX_LADDER.to_vec(), n).burn_in(0);
    let results: Vec<(u64, f64)> = (0..effort.chains as u64)
        .into_par_iter()
        .map(|c| {
            let mut hook = Polisher {
                land,
                raw: f64::NEG_INFINITY,
                best: (0, f64::NEG_INFINITY),
            };
            run_ladder(land, &cfg, c, &mut hook)?;
            Ok(hook.best)
        })
        .collect::<Result<_>>()?;
    let best = results.iter().fold((0u64, f64::NEG_INFINITY), |a, &b| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    });
    Ok(MaxEstimate {
        m: land.fitness_bits(best.0) / n as f64,
        genome: Genome::from_bits(n, best.0)?,
        per_chain: results.iter().map(|r| r.1 / n as f64).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaStats {
    pub beta: f64,
    pub p_q0: EstimateWithError,
    pub p_q1: EstimateWithError,
    pub mean_q: EstimateWithError,
    pub mean_r: EstimateWithError,
    /// Pooled frequency of each `N Q` value.
    pub q_histogram: Vec<f64>,
    /// Pooled frequency of `N R = -N, -N+2, ..., N`.
    pub r_histogram: Vec<f64>,
}

/// Overlap statistics between independent replicas at `beta`.
///
/// Chains `2i` and `2i+1` form replica pair `i`; each runs tempering on the
/// grid up to `beta` and their target-temperature samples are compared at
/// equal times. Error bars are over pairs.
pub fn replica_overlap_stats(
    land: &Landscape,
    beta: f64,
    step: f64,
    effort: &Effort,
) -> Result<ReplicaStats> {
    effort.check(2 * MIN_CHAINS)?;
    let (n, k) = (land.n(), land.k());
    let ladder: Vec<f64> = if beta == 0.0 {
        vec![0.0]
    } else {
        beta_grid(beta, step)?.into_iter().skip(1).collect()
    };
    let cfg = effort.config(ladder, n).record_states(true);
    let top = cfg.betas.len() - 1;
    let states: Vec<Vec<u64>> = (0..effort.chains as u64 / 2 * 2)
        .into_par_iter()
        .map(|c| {
            Ok(run_ladder(land, &cfg, c, &mut ())?
                .traces
                .swap_remove(top)
                .states)
        })
        .collect::<Result<_>>()?;
    let mask = low_mask(n);
    let mut q_hist = vec![0.0; n + 1];
    let mut r_hist = vec![0.0; n + 1];
    let mut rows = Vec::new();
    for pair in states.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (mut q0, mut q1, mut qs, mut rs) = (0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in a.iter().zip(b) {
            let agree = !(x ^ y) & mask;
            let nq = epistatic_count(agree, n, k) as usize;
            let nr = 2 * agree.count_ones() as i64 - n as i64;
            q0 += (nq == 0) as u8 as f64;
            q1 += (nq == n) as u8 as f64;
            qs += nq as f64 / n as f64;
            rs += nr as f64 / n as f64;
            q_hist[nq] += 1.0;
            r_hist[((nr + n as i64) / 2) as usize] += 1.0;
        }
        let t = a.len() as f64;
        rows.push([q0 / t, q1 / t, qs / t, rs / t]);
    }
    let col = |i: usize| {
        EstimateWithError::from_replicates(&rows.iter().map(|r| r[i]).collect::<Vec<_>>())
    };
    let total: f64 = q_hist.iter().sum();
    q_hist.iter_mut().for_each(|x| *x /= total);
    r_hist.iter_mut().for_each(|x| *x /= total);
    Ok(ReplicaStats {
        beta,
        p_q0: col(0),
        p_q1: col(1),
        mean_q: col(2),
        mean_r: col(3),
        q_histogram: q_hist,
        r_histogram: r_hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{exact_free_energy, exact_overlap_law, ground_state};
    use crate::landscape::CacheMode;

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
    fn replicate_statistics() {
        let e = EstimateWithError::from_replicates(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(e.agrees_with(2.0, 1.0));
        let white: Vec<f64> = (0..4000).map(|i| ((i * 7919) % 13) as f64).collect();
        assert!(tau_int(&white) < 2.0);
        // AR(1) with phi = 0.9 has tau = (1 + phi) / (1 - phi) = 19
        let mut rng = crate::rng::CounterRng::new(1, &[2]);
        let mut x = 0.0;
        let ar: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + rng.uniform() - 0.5;
                x
            })
            .collect();
        let tau = tau_int(&ar);
        assert!((tau - 19.0).abs() < 3.0, "{tau}");
    }

    #[test]
    fn grids() {
        let g = beta_grid(1.0, 0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 1.0);
        assert!(beta_grid(1.0, 0.2).is_err());
        assert_eq!(beta_grid(0.03, 0.05).unwrap(), vec![0.0, 0.03]);
    }

    #[test]
    fn ti_matches_exact() {
        let l = land(10, 3, 31);
        let effort = Effort::new(8, 4000, 5);
        let est = free_energy_ti(&l, 1.0, 0.05, &effort).unwrap();
        let exact = exact_free_energy(&l, 1.0).unwrap();
        assert!(
            est.f.agrees_with(exact.f, 4.0),
            "{:?} vs {}",
            est.f,
            exact.f
        );
        assert!(est.mean_energy.agrees_with(exact.mean_energy, 4.0));
        assert!(est.f.std_error < 0.01);
        let zero = free_energy_ti(&l, 0.0, 0.05, &effort).unwrap();
        assert_eq!(zero.f.value, std::f64::consts::LN_2);
        assert!(free_energy_ti(&l, 1.0, 0.05, &Effort::new(4, 100, 1)).is_err());
    }

    #[test]
    fn max_is_a_monotone_lower_bound() {
        let l = land(14, 6, 8);
        let m = ground_state(&l).unwrap().m;
        let small = estimate_max(&l, &Effort::new(1, 20, 3)).unwrap();
        let large = estimate_max(&l, &Effort::new(2, 400, 3)).unwrap();
        assert!(small.m <= m && large.m <= m);
        assert!(large.m >= small.m);
        assert_eq!(large.m, m);
        assert!((l.norm_fitness(&large.genome).unwrap() - large.m).abs() == 0.0);
    }

    #[test]
    fn replica_collision_matches_exact() {
        let l = land(10, 9, 2);
        let exact = exact_overlap_law(&l, 2.0).unwrap();
        let stats = replica_overlap_stats(&l, 2.0, 0.1, &Effort::new(16, 6000, 11)).unwrap();
        assert!(
            stats.p_q1.agrees_with(exact.p_q1, 4.0),
            "{:?} vs {}",
            stats.p_q1,
            exact.p_q1
        );
        assert!((stats.p_q0.value + stats.p_q1.value - 1.0).abs() < 1e-12);
        assert!((stats.q_histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
