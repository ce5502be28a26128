use serde::{Deserialize, Serialize};

use crate::error::{NkError, Result};

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntInterval {
    pub lo: i64,
    pub hi: i64,
}

impl IntInterval {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: i64) -> Self {
        Self { lo: v, hi: v }
    }

    fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Predicate on an exact overlap pair `(N Q, N R)`: `N Q` must lie in one of
/// `q` and `|N R|` in one of `abs_r`; an empty list places no restriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub label: String,
    pub n: usize,
    pub q: Vec<IntInterval>,
    pub abs_r: Vec<IntInterval>,
}

/// `x` snapped to a nearby integer so that `0.3 * 10` counts as 3.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Smallest integer strictly above `x`.
fn above(x: f64) -> i64 {
    snap(x).floor() as i64 + 1
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(NkError::Domain(format!("delta = {delta} outside [0, 1)")));
    }
    Ok(())
}

impl ConstraintSet {
    pub fn custom(label: &str, n: usize, q: Vec<IntInterval>, abs_r: Vec<IntInterval>) -> Self {
        Self {
            label: label.to_string(),
            n,
            q,
            abs_r,
        }
    }

    pub fn all(n: usize) -> Self {
        Self::custom("all", n, vec![], vec![])
    }

    /// `0 < Q < 1`.
    pub fn q_strictly_between(n: usize) -> Self {
        Self::custom("0<Q<1", n, vec![IntInterval::new(1, n as i64 - 1)], vec![])
    }

    /// `Q = 1`, i.e. identical genomes.
    pub fn q_one(n: usize) -> Self {
        Self::custom("Q=1", n, vec![IntInterval::point(n as i64)], vec![])
    }

    /// `Q = 0` and `|R| > delta`.
    pub fn q_zero_r_above(n: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self::custom(
            &format!("Q=0,|R|>{delta}"),
            n,
            vec![IntInterval::point(0)],
            vec![IntInterval::new(above(delta * n as f64), n as i64)],
        ))
    }

    /// `delta < |R| < 1`.
    pub fn r_between(n: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self::custom(
            &format!("{delta}<|R|<1"),
            n,
            vec![],
            vec![IntInterval::new(above(delta * n as f64), n as i64 - 1)],
        ))
    }

    /// `Q in (0, c1 - delta] U [c2 + delta, 1)`.
    pub fn q_band(n: usize, c1: f64, c2: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let nf = n as f64;
        let lo_hi = snap((c1 - delta) * nf).floor() as i64;
        let hi_lo = snap((c2 + delta) * nf).ceil() as i64;
        let mut q = Vec::new();
        if lo_hi >= 1 {
            q.push(IntInterval::new(1, lo_hi.min(n as i64 - 1)));
        }
        if hi_lo < n as i64 {
            q.push(IntInterval::new(hi_lo.max(1), n as i64 - 1));
        }
        if q.is_empty() {
            // Nothing admissible on this N; keep an empty interval so the
            // set is recognisably empty rather than unrestricted.
            q.push(IntInterval::new(1, 0));
        }
        Ok(Self::custom(
            &format!("Q-band({c1:.6},{c2:.6},{delta})"),
            n,
            q,
            vec![],
        ))
    }

    pub fn contains(&self, nq: u32, nr: i32) -> bool {
        let q_ok = self.q.is_empty() || self.q.iter().any(|iv| iv.contains(nq as i64));
        let r = (nr as i64).abs();
        let r_ok = self.abs_r.is_empty() || self.abs_r.iter().any(|iv| iv.contains(r));
        q_ok && r_ok
    }
}
