//! Experiment configuration: a single JSON document.

use std::path::PathBuf;

use nk_core::landscape::LandscapeSpec;
use nk_core::rng::SeedRange;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    FreeEnergyConvergence,
    MaxFitnessConvergence,
    OverlapLaw,
    GapCheck,
    CountCheck,
    SecondMoment,
    TheoryCurves,
    PathCheck,
    Chaos,
    Concentration,
    Monotonicity,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::FreeEnergyConvergence,
        Experiment::MaxFitnessConvergence,
        Experiment::OverlapLaw,
        Experiment::GapCheck,
        Experiment::CountCheck,
        Experiment::SecondMoment,
        Experiment::TheoryCurves,
        Experiment::PathCheck,
        Experiment::Chaos,
        Experiment::Concentration,
        Experiment::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FreeEnergyConvergence => "free_energy_convergence",
            Experiment::MaxFitnessConvergence => "max_fitness_convergence",
            Experiment::OverlapLaw => "overlap_law",
            Experiment::GapCheck => "gap_check",
            Experiment::CountCheck => "count_check",
            Experiment::SecondMoment => "second_moment",
            Experiment::TheoryCurves => "theory_curves",
            Experiment::PathCheck => "path_check",
            Experiment::Chaos => "chaos",
            Experiment::Concentration => "concentration",
            Experiment::Monotonicity => "monotonicity",
        }
    }

    /// Ranges that must be nonempty for this experiment. `"epistasis"`
    /// means `k` or `alpha`.
    fn required(self) -> &'static [&'static str] {
        match self {
            Experiment::FreeEnergyConvergence => &["n", "epistasis", "beta"],
            Experiment::MaxFitnessConvergence => &["n", "epistasis"],
            Experiment::OverlapLaw => &["n", "epistasis", "beta"],
            Experiment::GapCheck => &["n", "alpha", "delta"],
            Experiment::CountCheck => &["n", "k"],
            Experiment::SecondMoment => &["n", "epistasis", "s"],
            Experiment::TheoryCurves => &["alpha"],
            Experiment::PathCheck => &["n", "epistasis"],
            Experiment::Chaos => &["n", "epistasis", "s"],
            Experiment::Concentration => &["n", "epistasis", "beta"],
            Experiment::Monotonicity => &["n", "k"],
        }
    }
}

/// Parameter lists; an experiment runs over their Cartesian product.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranges {
    pub n: Vec<usize>,
    /// Takes precedence over `alpha` where an experiment accepts either.
    pub k: Vec<usize>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub s: Vec<f64>,
    pub delta: Vec<f64>,
    pub p: Vec<u32>,
}

/// Either a fixed `K` or a fixed `alpha = K / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Epistasis {
    K(usize),
    Alpha(f64),
}

impl Epistasis {
    pub fn spec(self, n: usize, seed: u64) -> nk_core::Result<LandscapeSpec> {
        match self {
            Epistasis::K(k) => LandscapeSpec::with_k(n, k, seed),
            Epistasis::Alpha(a) => LandscapeSpec::with_alpha(n, a, seed),
        }
    }
}

impl Ranges {
    pub fn epistasis(&self) -> Vec<Epistasis> {
        if self.k.is_empty() {
            self.alpha.iter().map(|&a| Epistasis::Alpha(a)).collect()
        } else {
            self.k.iter().map(|&k| Epistasis::K(k)).collect()
        }
    }

    fn is_empty(&self, name: &str) -> bool {
        match name {
            "n" => self.n.is_empty(),
            "k" => self.k.is_empty(),
            "alpha" => self.alpha.is_empty(),
            "epistasis" => self.k.is_empty() && self.alpha.is_empty(),
            "beta" => self.beta.is_empty(),
            "s" => self.s.is_empty(),
            "delta" => self.delta.is_empty(),
            "p" => self.p.is_empty(),
            _ => unreachable!(),
        }
    }
}

/// Sampler and probe budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Independent chains per estimate.
    pub chains: usize,
    /// Sweeps (N proposals each) per chain.
    pub sweeps: u64,
    /// Largest spacing of the tempering / integration grid.
    pub step: f64,
    /// Largest N handled by exhaustive enumeration; beyond it the sampler
    /// is used.
    pub exact_limit: usize,
    /// Also run the sampler where the exact answer is available.
    pub compare_sampler: bool,
    /// Bridge step counts for `path_check`.
    pub path_steps: Vec<usize>,
    /// Near-fittest tolerance for bridge endpoints.
    pub eta: f64,
    /// Deviation grid for `concentration`.
    pub t_grid: Vec<f64>,
    /// Interior grid size for curve experiments.
    pub points: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            chains: 16,
            sweeps: 2000,
            step: 0.05,
            exact_limit: 22,
            compare_sampler: false,
            path_steps: vec![10],
            eta: 0.2,
            t_grid: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5],
            points: 49,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub ranges: Ranges,
    pub seeds: SeedRange,
    #[serde(default)]
    pub knobs: Knobs,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        for name in self.experiment.required() {
            if self.ranges.is_empty(name) {
                return Err(CliError::Usage(format!(
                    "experiment {} needs a nonempty `{name}` range",
                    self.experiment.name()
                )));
            }
        }
        if self.seeds.count == 0 {
            return Err(CliError::Usage("seed count must be at least 1".into()));
        }
        if self.knobs.chains == 0 || self.knobs.sweeps == 0 {
            return Err(CliError::Usage("chains and sweeps must be positive".into()));
        }
        Ok(())
    }
}
