//! Closed forms and numerically resolved constants of the NK model:
//! the limiting free energy, entropy functions, second-moment machinery,
//! overlap-gap thresholds and the p-spin threshold `beta_p`.

mod beta_p;
mod gap;
mod moments;
mod normal;

use std::f64::consts::LN_2;

pub use beta_p::{beta_p, beta_p_objective, BetaP};
pub use gap::{
    delta_star, e_curve, e_prime_curve, energy_e, energy_e_prime, gap_bounds, GapBounds,
    HighEpistasis, LowEpistasis,
};
pub use moments::{
    f_s, min_f, regime_positivity, second_moment_ratio, sup_identity_check, RegimeReport,
    SecondMoment, SupIdentityReport,
};
pub use normal::{
    gauss_pdf, gauss_sf, integrate, integrate_from, lemma2_3_bound, ln_gauss_sf, mills_lower,
    orthant_prob,
};

use crate::error::{NkError, Result};

/// Critical inverse temperature `sqrt(2 ln 2)`.
pub fn beta_c() -> f64 {
    (2.0 * LN_2).sqrt()
}

/// Epistasis threshold `3 - 2 sqrt(2)`.
pub fn alpha_star() -> f64 {
    3.0 - 2.0 * 2f64.sqrt()
}

/// `lim E F_{N,K}(beta)`: `ln 2 + beta^2 / 2` below `beta_c`, `beta beta_c` above.
pub fn limiting_free_energy(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(NkError::Domain(format!("beta = {beta} must be positive")));
    }
    let bc = beta_c();
    Ok(if beta < bc {
        LN_2 + 0.5 * beta * beta
    } else {
        beta * bc
    })
}

/// Derivative of [`limiting_free_energy`] in beta.
pub fn limiting_free_energy_slope(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(NkError::Domain(format!("beta = {beta} must be positive")));
    }
    Ok(beta.min(beta_c()))
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `h(u) = 1 - ((1+u)/2) log2((1+u)/2) - ((1-u)/2) log2((1-u)/2)` on `[0, 1]`,
/// strictly decreasing from 2 to 1.
pub fn entropy_h(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(NkError::Domain(format!("h(u) needs u in [0, 1], got {u}")));
    }
    Ok(1.0 - xlog2x(0.5 * (1.0 + u)) - xlog2x(0.5 * (1.0 - u)))
}

/// Inverse of [`entropy_h`] on `[1, 2]` by bisection.
pub fn h_inverse(y: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&y) {
        return Err(NkError::Domain(format!(
            "h^-1(y) needs y in [1, 2], got {y}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_h(mid)? > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `I(u) = ((1+u) ln(1+u) + (1-u) ln(1-u)) / 2`, with `I(1) = ln 2`.
pub fn rate_i(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(NkError::Domain(format!("I(u) needs u in [0, 1], got {u}")));
    }
    Ok(rate_i_unchecked(u))
}

pub(crate) fn rate_i_unchecked(u: f64) -> f64 {
    if u < 0.05 {
        // sum_k u^{2k} / (2k (2k - 1))
        let u2 = u * u;
        let mut term = u2;
        let mut acc = 0.0;
        for k in 1..=14 {
            let kk = 2.0 * k as f64;
            acc += term / (kk * (kk - 1.0));
            term *= u2;
        }
        return acc;
    }
    let right = if u >= 1.0 {
        0.0
    } else {
        (1.0 - u) * (-u).ln_1p()
    };
    0.5 * ((1.0 + u) * u.ln_1p() + right)
}

/// `Delta(alpha) = sqrt(alpha^2 - 6 alpha + 1)`, real for `alpha <= alpha_*`.
pub fn discriminant(alpha: f64) -> Option<f64> {
    // Factored through the roots 3 -+ 2 sqrt 2 to avoid cancellation near alpha_*.
    let d = (alpha_star() - alpha) * (3.0 + 2.0 * std::f64::consts::SQRT_2 - alpha);
    if d < 0.0 {
        None
    } else {
        Some(d.sqrt())
    }
}

/// `(c1, c2) = ((1 - alpha -+ Delta) / 2)` for `0 < alpha <= alpha_*`.
pub fn c1_c2(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= alpha_star() + 1e-15) {
        return Err(NkError::Domain(format!(
            "c1/c2 are defined for 0 < alpha <= alpha_*, got {alpha}"
        )));
    }
    let d = discriminant(alpha)
        .ok_or_else(|| NkError::Domain(format!("Delta({alpha}) is not real")))?;
    Ok((0.5 * (1.0 - alpha - d), 0.5 * (1.0 - alpha + d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((beta_c() - 1.177_410).abs() < 1e-6);
        assert!((alpha_star() - 0.171_573).abs() < 1e-6);
        assert!(discriminant(alpha_star()).unwrap().abs() < 1e-12);
        assert!(discriminant(0.2).is_none());
    }

    #[test]
    fn free_energy_branches_meet() {
        let bc = beta_c();
        let left = LN_2 + 0.5 * bc * bc;
        let right = bc * bc;
        assert!((left - right).abs() < 1e-12);
        assert!((limiting_free_energy(bc).unwrap() - 2.0 * LN_2).abs() < 1e-12);
        let below = limiting_free_energy(bc * (1.0 - 1e-12)).unwrap();
        assert!((below - 2.0 * LN_2).abs() < 1e-11);
        let sl = limiting_free_energy_slope(bc * (1.0 - 1e-13)).unwrap();
        assert!((sl - limiting_free_energy_slope(bc).unwrap()).abs() < 1e-12);
        assert!((limiting_free_energy(1e-9).unwrap() - LN_2).abs() < 1e-12);
        assert!(limiting_free_energy(0.0).is_err());
        // F(beta)/beta -> beta_c
        let big = 1e6;
        assert!((limiting_free_energy(big).unwrap() / big - bc).abs() < 1e-12);
    }

    #[test]
    fn free_energy_is_convex() {
        let mut prev_slope = 0.0;
        for i in 1..400 {
            let b = i as f64 * 0.01;
            let sl = limiting_free_energy_slope(b).unwrap();
            assert!(sl >= prev_slope);
            prev_slope = sl;
        }
    }

    #[test]
    fn entropy_function() {
        assert_eq!(entropy_h(0.0).unwrap(), 2.0);
        assert_eq!(entropy_h(1.0).unwrap(), 1.0);
        assert!((entropy_h(0.5).unwrap() - 1.811_278).abs() < 1e-5);
        let mut prev = 3.0;
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            let h = entropy_h(u).unwrap();
            assert!(h < prev);
            prev = h;
            if i > 0 && i < 1000 {
                assert!((h_inverse(h).unwrap() - u).abs() < 1e-9, "u = {u}");
            }
        }
        assert!(entropy_h(1.1).is_err());
        assert!(h_inverse(0.5).is_err());
    }

    #[test]
    fn rate_function() {
        assert_eq!(rate_i(0.0).unwrap(), 0.0);
        assert!((rate_i(1.0).unwrap() - LN_2).abs() < 1e-15);
        for i in 1..=10_000 {
            let u = i as f64 / 10_000.0;
            assert!(rate_i(u).unwrap() >= 0.5 * u * u);
        }
        // series and closed form agree at the switch
        let u = 0.05;
        let closed = 0.5 * ((1.0 + u) * f64::ln_1p(u) + (1.0 - u) * f64::ln_1p(-u));
        assert!((rate_i_unchecked(0.049_999_999_999_999) - closed).abs() < 1e-16);
    }

    #[test]
    fn c1_c2_identities() {
        for a in [0.05, 0.1, 0.17] {
            let (c1, c2) = c1_c2(a).unwrap();
            assert!((c1 * c2 - a).abs() < 1e-12);
            assert!((c1 + c2 - (1.0 - a)).abs() < 1e-15);
            assert!(c1 > 0.0 && c2 < 1.0 - a);
        }
        let (c1, c2) = c1_c2(0.1).unwrap();
        assert!((c1 - 0.129_844).abs() < 1e-6);
        assert!((c2 - 0.770_156).abs() < 1e-6);
        assert!(c1_c2(0.3).is_err());
    }
}
