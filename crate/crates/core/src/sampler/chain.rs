//! Single-spin-flip Metropolis chains and replica-exchange (parallel tempering).

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{NkError, Result};
use crate::landscape::{low_mask, Genome, Landscape};
use crate::rng::CounterRng;

/// Chain settings. `steps` and `burn_in` count single-flip proposals per
/// replica; observations are recorded once per sweep (`N` proposals) after
/// burn-in, and replica swaps are attempted every `swap_interval` sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub betas: Vec<f64>,
    pub steps: u64,
    pub burn_in: u64,
    pub rng_seed: u64,
    pub swap_interval: u64,
    /// Keep the recorded genomes, not only their energies.
    pub record_states: bool,
}

impl ChainConfig {
    pub fn single(beta: f64, steps: u64, rng_seed: u64) -> Self {
        Self::ladder(vec![beta], steps, rng_seed)
    }

    pub fn ladder(betas: Vec<f64>, steps: u64, rng_seed: u64) -> Self {
        Self {
            betas,
            steps,
            burn_in: steps / 4,
            rng_seed,
            swap_interval: 1,
            record_states: false,
        }
    }

    pub fn burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn record_states(mut self, on: bool) -> Self {
        self.record_states = on;
        self
    }

    pub fn swap_interval(mut self, sweeps: u64) -> Self {
        self.swap_interval = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(NkError::Chain("empty temperature ladder".into()));
        }
        if self.betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(NkError::Chain(format!(
                "inverse temperatures must be finite and >= 0: {:?}",
                self.betas
            )));
        }
        if self.betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NkError::Chain("ladder must be strictly increasing".into()));
        }
        if self.burn_in >= self.steps {
            return Err(NkError::Chain(format!(
                "burn_in {} must be below steps {}",
                self.burn_in, self.steps
            )));
        }
        if self.swap_interval == 0 {
            return Err(NkError::Chain("swap_interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// Recorded observations at one inverse temperature.
#[derive(Debug, Clone, Serialize)]
pub struct ChainTrace {
    pub beta: f64,
    /// `H / N` once per sweep after burn-in.
    pub energies: Vec<f64>,
    /// Genome bits at the same instants, when requested.
    pub states: Vec<u64>,
    pub accepted: u64,
    pub proposed: u64,
}

impl ChainTrace {
    pub fn mean_energy(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.energies.len() as f64
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainRun {
    /// One trace per ladder temperature (ascending).
    pub traces: Vec<ChainTrace>,
    /// Swap acceptance rate between temperatures `i` and `i + 1`.
    pub swap_acceptance: Vec<f64>,
    /// Final genome at each temperature.
    pub finals: Vec<Genome>,
    /// Fittest genome visited by any replica, with `H`.
    pub best: (Genome, f64),
}

/// Hook called whenever a replica reaches a new overall best `(bits, H)`.
pub(crate) trait BestHook {
    fn improved(&mut self, bits: u64, h: f64);
}

impl BestHook for () {
    fn improved(&mut self, _: u64, _: f64) {}
}

pub(crate) fn run_ladder<B: BestHook>(
    land: &Landscape,
    cfg: &ChainConfig,
    chain_id: u64,
    hook: &mut B,
) -> Result<ChainRun> {
    cfg.validate()?;
    let n = land.n();
    let mask = low_mask(n);
    let r = cfg.betas.len();
    let mut rng = CounterRng::new(cfg.rng_seed, &[chain_id]);
    // slot i holds the replica currently at temperature betas[i]
    let mut bits: Vec<u64> = (0..r).map(|_| rng.next_u64() & mask).collect();
    let mut h: Vec<f64> = bits.iter().map(|&b| land.fitness_bits(b)).collect();
    let mut traces: Vec<ChainTrace> = cfg
        .betas
        .iter()
        .map(|&beta| ChainTrace {
            beta,
            energies: Vec::new(),
            states: Vec::new(),
            accepted: 0,
            proposed: 0,
        })
        .collect();
    let mut swaps = vec![(0u64, 0u64); r.saturating_sub(1)];
    let (mut best_bits, mut best_h) = (bits[0], h[0]);
    for i in 0..r {
        if h[i] > best_h {
            best_bits = bits[i];
            best_h = h[i];
        }
    }
    hook.improved(best_bits, best_h);
    let nf = n as f64;
    let n64 = n as u64;
    let mut sweep = 0u64;
    for t in 0..cfg.steps {
        for i in 0..r {
            let j = rng.below(n64) as usize;
            let d = land.delta_bits(bits[i], j);
            let u = rng.uniform();
            traces[i].proposed += 1;
            if d >= 0.0 || u < (cfg.betas[i] * d).exp() {
                bits[i] ^= 1 << j;
                h[i] += d;
                traces[i].accepted += 1;
                if h[i] > best_h {
                    best_h = h[i];
                    best_bits = bits[i];
                    hook.improved(best_bits, best_h);
                }
            }
        }
        if (t + 1) % n64 != 0 {
            continue;
        }
        sweep += 1;
        if t >= cfg.burn_in {
            for i in 0..r {
                traces[i].energies.push(h[i] / nf);
                if cfg.record_states {
                    traces[i].states.push(bits[i]);
                }
            }
        }
        if r > 1 && sweep.is_multiple_of(cfg.swap_interval) {
            // alternate even and odd adjacent pairs
            let parity = ((sweep / cfg.swap_interval) % 2) as usize;
            let mut i = parity;
            while i + 1 < r {
                let a = (cfg.betas[i] - cfg.betas[i + 1]) * (h[i + 1] - h[i]);
                let u = rng.uniform();
                swaps[i].1 += 1;
                if a >= 0.0 || u < a.exp() {
                    bits.swap(i, i + 1);
                    h.swap(i, i + 1);
                    swaps[i].0 += 1;
                }
                i += 2;
            }
        }
    }
    Ok(ChainRun {
        traces,
        swap_acceptance: swaps
            .iter()
            .map(|&(a, p)| a as f64 / p.max(1) as f64)
            .collect(),
        finals: bits
            .iter()
            .map(|&b| Genome::from_bits(n, b))
            .collect::<Result<_>>()?,
        best: (
            Genome::from_bits(n, best_bits)?,
            land.fitness_bits(best_bits),
        ),
    })
}

/// Metropolis chain at a single inverse temperature; the chain's random
/// stream is keyed by `(cfg.rng_seed, chain_id)`.
pub fn metropolis_chain(land: &Landscape, cfg: &ChainConfig, chain_id: u64) -> Result<ChainRun> {
    if cfg.betas.len() != 1 {
        return Err(NkError::Chain(
            "metropolis_chain takes a single beta".into(),
        ));
    }
    run_ladder(land, cfg, chain_id, &mut ())
}

/// Replica exchange over the ladder in `cfg`.
pub fn parallel_tempering(land: &Landscape, cfg: &ChainConfig, chain_id: u64) -> Result<ChainRun> {
    run_ladder(land, cfg, chain_id, &mut ())
}
