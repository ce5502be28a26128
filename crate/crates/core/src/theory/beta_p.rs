use std::f64::consts::LN_2;

use super::rate_i_unchecked;
use crate::error::{NkError, Result};

/// Objective `g(u) = (1 + u^-p) I(u)` whose infimum over `(0, 1)` is `beta_p^2`.
pub fn beta_p_objective(p: u32, u: f64) -> f64 {
    (1.0 + u.powi(-(p as i32))) * rate_i_unchecked(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaP {
    pub p: u32,
    pub beta: f64,
    /// `inf g`.
    pub inf: f64,
    /// Location of the infimum; 0 or 1 when it is a boundary limit.
    pub argmin: f64,
    pub boundary: bool,
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-16 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// `beta_p = sqrt(inf_{0<u<1} (1 + u^-p) I(u))` for even `p >= 2`.
///
/// The infimum is a boundary limit for `p = 2` (`g(0+) = 1/2`) and sits
/// within `1e-4` of `u = 1` for large `p`, so the search uses log-spaced grids
/// towards both endpoints before golden-section refinement and is compared
/// with the analytic limits `g(0+)` and `g(1-) = 2 ln 2`.
pub fn beta_p(p: u32) -> Result<BetaP> {
    if p < 2 || p % 2 == 1 {
        return Err(NkError::Domain(format!(
            "beta_p needs an even p >= 2, got {p}"
        )));
    }
    let g = |u: f64| beta_p_objective(p, u);
    let per_side = 4000;
    let mut grid: Vec<f64> = Vec::with_capacity(2 * per_side + 1);
    for j in 0..per_side {
        // 1e-12 .. 0.5
        let e = -12.0 + (j as f64 / per_side as f64) * (12.0 - std::f64::consts::LOG10_2);
        grid.push(10f64.powf(e));
    }
    grid.push(0.5);
    for j in (0..per_side).rev() {
        // 1 - 1e-15 .. 0.5
        let e = -15.0 + (j as f64 / per_side as f64) * (15.0 - std::f64::consts::LOG10_2);
        grid.push(1.0 - 10f64.powf(e));
    }
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &u) in grid.iter().enumerate() {
        let v = g(u);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let u_ref = golden(g, lo, hi);
    let (mut argmin, mut inf) = if g(u_ref) < best {
        (u_ref, g(u_ref))
    } else {
        (grid[best_i], best)
    };

    let mut boundary = false;
    let left_limit = if p == 2 { 0.5 } else { f64::INFINITY };
    // g approaches 1/2 from above for p = 2; round-off can dip a hair below.
    if left_limit <= inf + 1e-12 {
        inf = left_limit;
        argmin = 0.0;
        boundary = true;
    }
    let right_limit = 2.0 * LN_2;
    if right_limit < inf {
        inf = right_limit;
        argmin = 1.0;
        boundary = true;
    }
    Ok(BetaP {
        p,
        beta: inf.sqrt(),
        inf,
        argmin,
        boundary,
    })
}
