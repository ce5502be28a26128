//! Overlap-gap thresholds and the fitness levels `E(delta)`, `E'(delta)`.
//!
//! The `rhs_*` fields are the amounts subtracted from `2 lim E M = 2 beta_c`
//! in the constrained-maximum bounds; the energy levels use `lim E M = beta_c`.

use serde::Serialize;

use super::{alpha_star, beta_c, c1_c2, discriminant, entropy_h, h_inverse};
use crate::error::{NkError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct HighEpistasis {
    /// `alpha > alpha_*`; the formulas below are evaluated regardless.
    pub in_regime: bool,
    pub rhs_q: f64,
    pub rhs_r: f64,
    pub energy_e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowEpistasis {
    pub c1: f64,
    pub c2: f64,
    pub delta_disc: f64,
    pub delta_star: f64,
    /// Present when `delta < c1`.
    pub rhs_q_low: Option<f64>,
    /// Present when `delta > delta_star`.
    pub rhs_r_low: Option<f64>,
    pub energy_e_prime: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapBounds {
    pub alpha: f64,
    pub delta: f64,
    pub h_delta: f64,
    pub high: HighEpistasis,
    /// Present when `alpha <= alpha_*`.
    pub low: Option<LowEpistasis>,
}

fn check(alpha: f64, delta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(NkError::BadAlpha(alpha));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(NkError::Domain(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

fn high_q_slack(alpha: f64) -> f64 {
    1.0 - (3.0 - alpha) / (2.0 * 2f64.sqrt())
}

fn high_r_slack(alpha: f64, h: f64) -> f64 {
    (1.0 - (h / 2.0).sqrt()).min(high_q_slack(alpha))
}

fn low_only(alpha: f64) -> Result<()> {
    if alpha > alpha_star() {
        return Err(NkError::Domain(format!(
            "alpha = {alpha} is above alpha_* = {}",
            alpha_star()
        )));
    }
    Ok(())
}

/// `h^{-1}(2 / (2 - alpha))`, for `alpha <= alpha_*`.
pub fn delta_star(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(NkError::BadAlpha(alpha));
    }
    low_only(alpha)?;
    h_inverse(2.0 / (2.0 - alpha))
}

pub fn energy_e(alpha: f64, delta: f64) -> Result<f64> {
    check(alpha, delta)?;
    Ok(beta_c() * (1.0 - high_r_slack(alpha, entropy_h(delta)?)))
}

/// Defined for `alpha <= alpha_*` and `delta_* < delta < 1`.
pub fn energy_e_prime(alpha: f64, delta: f64) -> Result<f64> {
    check(alpha, delta)?;
    let ds = delta_star(alpha)?;
    if delta <= ds {
        return Err(NkError::Domain(format!(
            "delta = {delta} is not above delta_* = {ds}"
        )));
    }
    Ok(beta_c() * ((2.0 - alpha) * entropy_h(delta)? / 2.0).sqrt())
}

pub fn gap_bounds(alpha: f64, delta: f64) -> Result<GapBounds> {
    check(alpha, delta)?;
    let bc = beta_c();
    let h = entropy_h(delta)?;
    let high = HighEpistasis {
        in_regime: alpha > alpha_star(),
        rhs_q: 2.0 * bc * high_q_slack(alpha),
        rhs_r: 2.0 * bc * high_r_slack(alpha, h),
        energy_e: energy_e(alpha, delta)?,
    };
    let low = match discriminant(alpha) {
        Some(disc) if alpha <= alpha_star() => {
            let (c1, c2) = c1_c2(alpha)?;
            let ds = delta_star(alpha)?;
            let above = h < 2.0 / (2.0 - alpha);
            Some(LowEpistasis {
                c1,
                c2,
                delta_disc: disc,
                delta_star: ds,
                rhs_q_low: (delta < c1)
                    .then(|| 2.0 * bc * (1.0 - (1.0 - delta * (disc + delta) / 2.0).sqrt())),
                rhs_r_low: above.then(|| 2.0 * bc * (1.0 - ((2.0 - alpha) * h / 2.0).sqrt())),
                energy_e_prime: above.then(|| bc * ((2.0 - alpha) * h / 2.0).sqrt()),
            })
        }
        _ => None,
    };
    Ok(GapBounds {
        alpha,
        delta,
        h_delta: h,
        high,
        low,
    })
}

/// `(delta, E(delta))` on an interior grid of `(0, 1)`.
pub fn e_curve(alpha: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    (1..=points)
        .map(|i| {
            let d = i as f64 / (points + 1) as f64;
            Ok((d, energy_e(alpha, d)?))
        })
        .collect()
}

/// `(delta, E'(delta))` on an interior grid of `(delta_*, 1)`.
pub fn e_prime_curve(alpha: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let ds = delta_star(alpha)?;
    (1..=points)
        .map(|i| {
            let d = ds + (1.0 - ds) * i as f64 / (points + 1) as f64;
            Ok((d, energy_e_prime(alpha, d)?))
        })
        .collect()
}
