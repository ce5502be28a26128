//! Second-moment machinery for the level-set count `L_N(s)`.

use serde::Serialize;

use super::{alpha_star, beta_c, gauss_sf, orthant_prob};
use crate::combinatorics::CountTable;
use crate::error::{NkError, Result};

const LN2: f64 = std::f64::consts::LN_2;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(NkError::BadAlpha(alpha))
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(NkError::Domain(format!("s = {s} must be positive")))
    }
}

/// `(alpha + t) ln 2 - t s^2 / (1 + t)` on `0 <= t <= 1 - alpha`.
pub fn f_s(alpha: f64, s: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_s(s)?;
    if !(t >= 0.0 && t <= 1.0 - alpha + 1e-12) {
        return Err(NkError::Domain(format!(
            "t = {t} outside [0, {}]",
            1.0 - alpha
        )));
    }
    Ok((alpha + t) * LN2 - t * s * s / (1.0 + t))
}

/// Minimizer and minimum of `f_s` over `[0, 1 - alpha]`.
///
/// `f_s` is convex in `t`, so the clamped stationary point
/// `s / sqrt(ln 2) - 1` is the minimizer.
pub fn min_f(alpha: f64, s: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_s(s)?;
    let t = (s / LN2.sqrt() - 1.0).clamp(0.0, 1.0 - alpha);
    Ok((t, f_s(alpha, s, t)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub alpha: f64,
    pub s_max: f64,
    pub grid_points: usize,
    pub min_value: f64,
    pub min_at_s: f64,
    pub all_positive: bool,
    /// First grid point (smallest `s`) with `min_f <= 0`.
    pub first_failure: Option<(f64, f64)>,
}

pub const REGIME_GRID: usize = 10_000;

/// Certifies `min_f(alpha, s) > 0` on an interior grid of `(0, s_max)`.
pub fn regime_positivity(alpha: f64) -> Result<RegimeReport> {
    check_alpha(alpha)?;
    let s_max = if alpha >= alpha_star() {
        beta_c()
    } else {
        LN2.sqrt() * (1.0 + alpha.sqrt())
    };
    let mut report = RegimeReport {
        alpha,
        s_max,
        grid_points: REGIME_GRID,
        min_value: f64::INFINITY,
        min_at_s: f64::NAN,
        all_positive: true,
        first_failure: None,
    };
    for i in 1..=REGIME_GRID {
        let s = s_max * i as f64 / (REGIME_GRID + 1) as f64;
        let (_, v) = min_f(alpha, s)?;
        if v < report.min_value {
            report.min_value = v;
            report.min_at_s = s;
        }
        if v <= 0.0 && report.first_failure.is_none() {
            report.all_positive = false;
            report.first_failure = Some((s, v));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondMoment {
    pub n: usize,
    pub k: usize,
    pub s: f64,
    /// `E L^2 / (E L)^2` assembled from the exact overlap counts.
    pub exact_ratio: f64,
    /// Three-term upper bound on the ratio.
    pub analytic_bound: f64,
    pub diagonal_term: f64,
    pub min_f: f64,
}

/// Exact second-moment ratio against its analytic upper bound.
///
/// The bound takes `alpha = K / N`, which makes `2^{-(K+l)} = 2^{-N(alpha+t)}`
/// exact at every finite `N`.
pub fn second_moment_ratio(
    n: usize,
    k: usize,
    s: f64,
    counts: &CountTable,
) -> Result<SecondMoment> {
    check_s(s)?;
    if counts.n != n || counts.k != k {
        return Err(NkError::Domain(format!(
            "count table is for (N, K) = ({}, {}), not ({n}, {k})",
            counts.n, counts.k
        )));
    }
    let nf = n as f64;
    let x = s * nf.sqrt();
    let p = gauss_sf(x);
    let two_n = 2f64.powi(n as i32);
    let mut ratio = 0.0;
    for (l, _) in counts.nonzero() {
        let t = l as f64 / nf;
        let joint = if l == n { p } else { orthant_prob(t, x)? };
        ratio += counts.get_f64(l) / two_n * (joint / (p * p));
    }
    let diagonal_term = 1.0 / (two_n * p);

    let (_, mf) = min_f(k as f64 / nf, s)?;
    let s2n = s * s * nf;
    let first =
        (2.0 * std::f64::consts::PI).sqrt() * (s2n + 1.0) / x * (-nf * (LN2 - s * s / 2.0)).exp();
    let third = 4.0 * std::f64::consts::PI * (s2n + 1.0).powi(2) * nf / (s * s) * (-nf * mf).exp();
    Ok(SecondMoment {
        n,
        k,
        s,
        exact_ratio: ratio,
        analytic_bound: 2.0 + first + third,
        diagonal_term,
        min_f: mf,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupRow {
    pub alpha: f64,
    pub t_star: f64,
    pub closed_form: f64,
    pub at_t_star: f64,
    pub grid_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupIdentityReport {
    pub rows: Vec<SupRow>,
    pub max_abs_error: f64,
    pub grid_consistent: bool,
    pub pass: bool,
}

fn sup_product(alpha: f64, t: f64) -> f64 {
    (1.0 + t) * (2.0 - alpha - t)
}

/// Checks `sup_{0<t<=1-alpha} (1+t)(2-alpha-t) = ((3-alpha)/2)^2`, attained
/// at `t = (1-alpha)/2`, on a grid of `alpha`.
pub fn sup_identity_check() -> SupIdentityReport {
    const GRID: usize = 100_000;
    let mut rows = Vec::new();
    let mut max_abs_error: f64 = 0.0;
    let mut grid_consistent = true;
    for j in 1..=20 {
        let alpha = j as f64 / 20.0;
        let t_star = (1.0 - alpha) / 2.0;
        let closed_form = ((3.0 - alpha) / 2.0).powi(2);
        let at_t_star = sup_product(alpha, t_star);
        let width = 1.0 - alpha;
        let grid_max = if width == 0.0 {
            sup_product(alpha, 0.0)
        } else {
            (1..=GRID)
                .map(|i| sup_product(alpha, width * i as f64 / GRID as f64))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        max_abs_error = max_abs_error.max((at_t_star - closed_form).abs());
        if grid_max > closed_form + 1e-12 || closed_form - grid_max > 1e-9 {
            grid_consistent = false;
        }
        rows.push(SupRow {
            alpha,
            t_star,
            closed_form,
            at_t_star,
            grid_max,
        });
    }
    SupIdentityReport {
        pass: max_abs_error <= 1e-12 && grid_consistent,
        rows,
        max_abs_error,
        grid_consistent,
    }
}
