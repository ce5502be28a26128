//! NK landscapes with adjacent cyclic neighbourhoods.
//!
//! The fitness of a genome is `H(g) = sum_i X_i(g_i, ..., g_{i+K})` with
//! i.i.d. standard Gaussian components. Components are never stored unless a
//! table cache is requested; they are recomputed from `(seed, i, word)`.

mod gaussian;
mod genome;
mod overlap;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use gaussian::{component_deviate, inverse_normal_cdf};
pub use genome::{Genome, WindowWord, MAX_LOCI};
pub use overlap::{
    overlap_q, overlap_q_one, overlap_r, windowed_overlap, windowed_overlap_count, OverlapValue,
};

pub(crate) use genome::low_mask;
pub(crate) use overlap::epistatic_count;

use crate::error::{NkError, Result};
use crate::rng::derive_seed;

/// Largest window width for which a table cache may be built.
pub const MAX_TABLE_WIDTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheMode {
    #[default]
    Hashed,
    Table,
}

/// Immutable landscape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct LandscapeSpec {
    n: usize,
    k: usize,
    alpha: Option<f64>,
    seed: u64,
    cache_mode: CacheMode,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    seed: u64,
    #[serde(default)]
    cache_mode: CacheMode,
}

impl TryFrom<RawSpec> for LandscapeSpec {
    type Error = NkError;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = match (raw.k, raw.alpha) {
            (Some(k), _) => {
                let s = Self::with_k(raw.n, k, raw.seed)?;
                if let Some(a) = raw.alpha {
                    let derived = Self::with_alpha(raw.n, a, raw.seed)?;
                    if derived.k != k {
                        return Err(NkError::Domain(format!(
                            "k = {k} disagrees with floor(alpha (N-1)) = {}",
                            derived.k
                        )));
                    }
                    derived
                } else {
                    s
                }
            }
            (None, Some(a)) => Self::with_alpha(raw.n, a, raw.seed)?,
            (None, None) => return Err(NkError::Domain("either k or alpha is required".into())),
        };
        spec.cache(raw.cache_mode)
    }
}

impl From<LandscapeSpec> for RawSpec {
    fn from(s: LandscapeSpec) -> Self {
        RawSpec {
            n: s.n,
            k: Some(s.k),
            alpha: s.alpha,
            seed: s.seed,
            cache_mode: s.cache_mode,
        }
    }
}

/// `K = floor(alpha (N - 1))`, guarded against representation error such as
/// `0.1 * 10 = 0.9999999999999999`.
pub fn k_from_alpha(n: usize, alpha: f64) -> usize {
    let x = alpha * (n - 1) as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

impl LandscapeSpec {
    pub fn with_k(n: usize, k: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_LOCI {
            return Err(NkError::BadLength(n));
        }
        if k > n - 1 {
            return Err(NkError::KTooLarge { k, max: n - 1 });
        }
        Ok(Self {
            n,
            k,
            alpha: None,
            seed,
            cache_mode: CacheMode::Hashed,
        })
    }

    pub fn with_alpha(n: usize, alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(NkError::BadAlpha(alpha));
        }
        if n == 0 || n > MAX_LOCI {
            return Err(NkError::BadLength(n));
        }
        let mut s = Self::with_k(n, k_from_alpha(n, alpha), seed)?;
        s.alpha = Some(alpha);
        Ok(s)
    }

    pub fn cache(mut self, mode: CacheMode) -> Result<Self> {
        if mode == CacheMode::Table && self.k + 1 > MAX_TABLE_WIDTH {
            return Err(NkError::TableTooLarge(self.k + 1));
        }
        self.cache_mode = mode;
        Ok(self)
    }

    /// Table mode when it fits in `max_entries` components, hashed otherwise.
    pub fn auto_cache(self, max_entries: usize) -> Self {
        let width = self.k + 1;
        if width <= MAX_TABLE_WIDTH && self.n.saturating_mul(1usize << width) <= max_entries {
            self.cache(CacheMode::Table).unwrap_or(self)
        } else {
            self
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// `alpha` if given, else `K / (N - 1)` (1 for `N = 1`).
    pub fn effective_alpha(&self) -> f64 {
        self.alpha.unwrap_or(if self.n > 1 {
            self.k as f64 / (self.n - 1) as f64
        } else {
            1.0
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cache_mode(&self) -> CacheMode {
        self.cache_mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    Seeded(u64),
    /// `w_base * X(base) + w_copy * X(copy)`.
    Blend {
        base: u64,
        copy: u64,
        w_base: f64,
        w_copy: f64,
    },
}

impl Source {
    #[inline]
    fn eval(&self, i: usize, word: u64) -> f64 {
        match *self {
            Source::Seeded(seed) => component_deviate(seed, i, word),
            Source::Blend {
                base,
                copy,
                w_base,
                w_copy,
            } => {
                w_base * component_deviate(base, i, word)
                    + w_copy * component_deviate(copy, i, word)
            }
        }
    }
}

/// Landscape handle: spec, component source and optional component table.
///
/// Cloning is cheap; the table is shared.
#[derive(Debug, Clone)]
pub struct Landscape {
    spec: LandscapeSpec,
    source: Source,
    width: usize,
    table: Option<Arc<[f64]>>,
}

impl Landscape {
    pub fn new(spec: LandscapeSpec) -> Result<Self> {
        Self::build(spec, Source::Seeded(spec.seed))
    }

    fn build(spec: LandscapeSpec, source: Source) -> Result<Self> {
        // Specs built through the public constructors already satisfy these.
        if spec.k > spec.n.saturating_sub(1) {
            return Err(NkError::KTooLarge {
                k: spec.k,
                max: spec.n - 1,
            });
        }
        let width = spec.k + 1;
        let table = match spec.cache_mode {
            CacheMode::Hashed => None,
            CacheMode::Table => {
                if width > MAX_TABLE_WIDTH {
                    return Err(NkError::TableTooLarge(width));
                }
                let per = 1usize << width;
                let mut t = vec![0.0; spec.n * per];
                for (idx, v) in t.iter_mut().enumerate() {
                    *v = source.eval(idx / per, (idx % per) as u64);
                }
                Some(Arc::from(t))
            }
        };
        Ok(Self {
            spec,
            source,
            width,
            table,
        })
    }

    pub fn spec(&self) -> &LandscapeSpec {
        &self.spec
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.spec.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.spec.k
    }

    /// Checked component lookup `X_i(word)`.
    pub fn component(&self, i: usize, word: u64) -> Result<f64> {
        if i >= self.n() {
            return Err(NkError::LocusOutOfRange {
                locus: i,
                n: self.n(),
            });
        }
        if word > low_mask(self.width) {
            return Err(NkError::WordOutOfRange {
                word,
                bits: self.width,
            });
        }
        Ok(self.component_unchecked(i, word))
    }

    #[inline]
    pub(crate) fn component_unchecked(&self, i: usize, word: u64) -> f64 {
        match &self.table {
            Some(t) => t[(i << self.width) | word as usize],
            None => self.source.eval(i, word),
        }
    }

    /// Window word of locus `i` in raw genome bits.
    #[inline]
    pub(crate) fn word_at(&self, bits: u64, i: usize) -> u64 {
        genome::rotr(bits, i, self.spec.n) & low_mask(self.width)
    }

    pub fn window(&self, g: &Genome, i: usize) -> WindowWord {
        WindowWord {
            locus: i % self.n(),
            word: self.word_at(g.bits(), i % self.n()),
        }
    }

    /// `H(bits)` summed over ascending loci.
    #[inline]
    pub(crate) fn fitness_bits(&self, bits: u64) -> f64 {
        let mut h = 0.0;
        for i in 0..self.spec.n {
            h += self.component_unchecked(i, self.word_at(bits, i));
        }
        h
    }

    /// `H(bits ^ (1 << j)) - H(bits)`; touches the windows `j-K..=j`.
    #[inline]
    pub(crate) fn delta_bits(&self, bits: u64, j: usize) -> f64 {
        let n = self.spec.n;
        let flipped = bits ^ (1u64 << j);
        let touched = self.width.min(n);
        let mut d = 0.0;
        for t in 0..touched {
            let i = (j + n - t) % n;
            d += self.component_unchecked(i, self.word_at(flipped, i))
                - self.component_unchecked(i, self.word_at(bits, i));
        }
        d
    }

    pub fn fitness(&self, g: &Genome) -> Result<f64> {
        g.check_len(self.n())?;
        Ok(self.fitness_bits(g.bits()))
    }

    /// `H / N`.
    pub fn norm_fitness(&self, g: &Genome) -> Result<f64> {
        Ok(self.fitness(g)? / self.n() as f64)
    }

    pub fn delta_fitness(&self, g: &Genome, j: usize) -> Result<f64> {
        g.check_len(self.n())?;
        if j >= self.n() {
            return Err(NkError::LocusOutOfRange {
                locus: j,
                n: self.n(),
            });
        }
        Ok(self.delta_bits(g.bits(), j))
    }

    /// Non-cyclic segment fitnesses `(V1, V2)` for the split at `n1`:
    /// `V1` sums the windows lying inside loci `0..n1`, `V2` those inside
    /// `n1..N`. Windows that straddle a boundary are dropped.
    pub fn split_fitness(&self, g: &Genome, n1: usize) -> Result<(f64, f64)> {
        g.check_len(self.n())?;
        let n = self.n();
        if n1 == 0 || n1 >= n {
            return Err(NkError::Domain(format!(
                "split point {n1} outside 1..={}",
                n - 1
            )));
        }
        let k = self.k();
        let n2 = n - n1;
        let segment = |start: usize, len: usize| -> f64 {
            let mut v = 0.0;
            if len > k {
                for i in 0..=(len - k - 1) {
                    let locus = start + i;
                    v += self.component_unchecked(locus, self.word_at(g.bits(), locus));
                }
            }
            v
        };
        Ok((segment(0, n1), segment(n1, n2)))
    }
}

/// Two landscapes `H^l_s = sqrt(s) H + sqrt(1 - s) H^l`, `l = 1, 2`, sharing
/// the base landscape `H`.
#[derive(Debug, Clone)]
pub struct CorrelatedPair {
    pub base_seed: u64,
    pub copy1_seed: u64,
    pub copy2_seed: u64,
    pub s: f64,
    pub first: Landscape,
    pub second: Landscape,
}

/// Builds the correlated pair on top of `spec` (its seed is the base seed).
pub fn interpolated_pair(spec: LandscapeSpec, s: f64) -> Result<CorrelatedPair> {
    if !(0.0..=1.0).contains(&s) {
        return Err(NkError::Domain(format!(
            "correlation s = {s} outside [0, 1]"
        )));
    }
    let base = spec.seed;
    let copy1 = derive_seed(base, 1);
    let copy2 = derive_seed(base, 2);
    let (w_base, w_copy) = (s.sqrt(), (1.0 - s).sqrt());
    let mk = |copy| {
        Landscape::build(
            spec,
            Source::Blend {
                base,
                copy,
                w_base,
                w_copy,
            },
        )
    };
    Ok(CorrelatedPair {
        base_seed: base,
        copy1_seed: copy1,
        copy2_seed: copy2,
        s,
        first: mk(copy1)?,
        second: mk(copy2)?,
    })
}
