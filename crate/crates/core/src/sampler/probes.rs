//! Disorder-level probes: chaos under landscape perturbation, concentration
//! of `F` and `M`, and monotonicity of `E M` in `K`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate_max, Effort, EstimateWithError};
use crate::enumeration::{exact_free_energy, ground_state};
use crate::error::{NkError, Result};
use crate::landscape::{interpolated_pair, overlap_q, Genome, Landscape, LandscapeSpec};
use crate::rng::SeedRange;

/// How the fittest genome of a landscape is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxSolver {
    Exact,
    Sampled(Effort),
    /// Exact up to `N = 20`, sampled beyond.
    Auto(Effort),
}

pub const AUTO_EXACT_LIMIT: usize = 20;

fn fittest(land: &Landscape, solver: &MaxSolver) -> Result<Genome> {
    match solver {
        MaxSolver::Exact => Ok(ground_state(land)?.sigma_star),
        MaxSolver::Sampled(e) => Ok(estimate_max(land, e)?.genome),
        MaxSolver::Auto(e) => {
            if land.n() <= AUTO_EXACT_LIMIT {
                Ok(ground_state(land)?.sigma_star)
            } else {
                Ok(estimate_max(land, e)?.genome)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    pub s: f64,
    /// Disorder mean of `Q` between the fittest genomes of the two
    /// correlated landscapes.
    pub phi: EstimateWithError,
    pub per_seed: Vec<f64>,
}

/// Estimates `phi(s) = E Q(sigma^{s,1}, sigma^{s,2})` over the base seeds in
/// `seeds`.
pub fn chaos_probe(
    spec: &LandscapeSpec,
    s: f64,
    seeds: SeedRange,
    solver: MaxSolver,
) -> Result<ChaosReport> {
    if seeds.count < 2 {
        return Err(NkError::Chain("need at least 2 disorder seeds".into()));
    }
    let per_seed: Vec<f64> = (0..seeds.count)
        .into_par_iter()
        .map(|i| {
            let pair = interpolated_pair(spec.with_seed(seeds.seed(i)).auto_cache(1 << 22), s)?;
            let a = fittest(&pair.first, &solver)?;
            let b = fittest(&pair.second, &solver)?;
            Ok(overlap_q(&a, &b, spec.k())?.as_f64())
        })
        .collect::<Result<_>>()?;
    Ok(ChaosReport {
        s,
        phi: EstimateWithError::from_replicates(&per_seed),
        per_seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub t: f64,
    pub tail_f: f64,
    pub envelope_f: f64,
    pub tail_m: f64,
    pub envelope_m: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub seeds: usize,
    pub mean_f: f64,
    pub std_f: f64,
    pub mean_m: f64,
    pub std_m: f64,
    pub rows: Vec<TailRow>,
    pub all_below: bool,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1).max(1) as f64;
    (m, v.sqrt())
}

/// Empirical tails `P(|F - mean F| >= t)` and `P(|M - mean M| >= t)` from
/// exact per-seed values, against `2 e^{-N t^2 / (4 beta^2)}` and
/// `2 e^{-N t^2 / 4}`.
pub fn concentration_probe(
    spec: &LandscapeSpec,
    beta: f64,
    seeds: SeedRange,
    t_grid: &[f64],
) -> Result<ConcentrationReport> {
    if !(beta > 0.0) {
        return Err(NkError::Domain(format!("beta = {beta} must be positive")));
    }
    if seeds.count < 2 {
        return Err(NkError::Chain("need at least 2 disorder seeds".into()));
    }
    let vals: Vec<(f64, f64)> = (0..seeds.count)
        .into_par_iter()
        .map(|i| {
            let land = Landscape::new(spec.with_seed(seeds.seed(i)).auto_cache(1 << 22))?;
            Ok((exact_free_energy(&land, beta)?.f, ground_state(&land)?.m))
        })
        .collect::<Result<_>>()?;
    let fs: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let ms: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let (mean_f, std_f) = mean_std(&fs);
    let (mean_m, std_m) = mean_std(&ms);
    let nf = spec.n() as f64;
    let cnt = seeds.count as f64;
    let rows: Vec<TailRow> = t_grid
        .iter()
        .map(|&t| TailRow {
            t,
            tail_f: fs.iter().filter(|f| (*f - mean_f).abs() >= t).count() as f64 / cnt,
            envelope_f: 2.0 * (-nf * t * t / (4.0 * beta * beta)).exp(),
            tail_m: ms.iter().filter(|m| (*m - mean_m).abs() >= t).count() as f64 / cnt,
            envelope_m: 2.0 * (-nf * t * t / 4.0).exp(),
        })
        .collect();
    let all_below = rows
        .iter()
        .all(|r| r.tail_f <= r.envelope_f && r.tail_m <= r.envelope_m);
    Ok(ConcentrationReport {
        n: spec.n(),
        k: spec.k(),
        beta,
        seeds: seeds.count,
        mean_f,
        std_f,
        mean_m,
        std_m,
        rows,
        all_below,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityRow {
    pub k: usize,
    pub mean_m: EstimateWithError,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub n: usize,
    pub rows: Vec<MonotonicityRow>,
    /// Each consecutive mean is at least the previous one minus three
    /// combined standard errors.
    pub nondecreasing: bool,
}

/// Disorder means of the exact `M` for each `K` in `ks` (ascending).
pub fn monotonicity_probe(n: usize, ks: &[usize], seeds: SeedRange) -> Result<MonotonicityReport> {
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NkError::Domain("K list must be strictly increasing".into()));
    }
    if seeds.count < 2 {
        return Err(NkError::Chain("need at least 2 disorder seeds".into()));
    }
    let rows: Vec<MonotonicityRow> = ks
        .iter()
        .map(|&k| {
            let spec = LandscapeSpec::with_k(n, k, 0)?;
            let ms: Vec<f64> = (0..seeds.count)
                .into_par_iter()
                .map(|i| {
                    Ok(ground_state(&Landscape::new(
                        spec.with_seed(seeds.seed(i)).auto_cache(1 << 22),
                    )?)?
                    .m)
                })
                .collect::<Result<_>>()?;
            Ok(MonotonicityRow {
                k,
                mean_m: EstimateWithError::from_replicates(&ms),
            })
        })
        .collect::<Result<_>>()?;
    let nondecreasing = rows.windows(2).all(|w| {
        let (a, b) = (&w[0].mean_m, &w[1].mean_m);
        b.value >= a.value - 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
    });
    Ok(MonotonicityReport {
        n,
        rows,
        nondecreasing,
    })
}
