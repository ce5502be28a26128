//! Gaussian tails and bivariate orthant probabilities.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use crate::error::{NkError, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn gauss_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Upper tail `P(Z >= x)`.
pub fn gauss_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `ln P(Z >= x)`, finite for all x.
pub fn ln_gauss_sf(x: f64) -> f64 {
    if x < 20.0 {
        return gauss_sf(x).ln();
    }
    // Laplace continued fraction phi(x) / (x + 1/(x + 2/(x + ...))).
    let mut cf = x;
    for k in (1..=120).rev() {
        cf = x + k as f64 / cf;
    }
    -0.5 * x * x - LN_SQRT_2PI - cf.ln()
}

/// Mills-type lower bound `s sqrt(N) / (sqrt(2 pi) (s^2 N + 1)) e^{-s^2 N / 2}`
/// on `P(Z >= s sqrt(N))`.
pub fn mills_lower(s: f64, n: f64) -> f64 {
    let x = s * n.sqrt();
    x / ((2.0 * PI).sqrt() * (x * x + 1.0)) * (-0.5 * x * x).exp()
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15), digits as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature on `[a, b]`.
///
/// Bisects the subinterval with the largest error estimate until the summed
/// estimate is below `max(tol, 1e-14 |result|)` or 2000 subintervals are used.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_from(f, &[a, b], tol)
}

/// [`integrate`] seeded with the sorted breakpoints `edges`, so features
/// narrower than the full range are not missed by the first estimate.
pub fn integrate_from<F: Fn(f64) -> f64>(f: F, edges: &[f64], tol: f64) -> f64 {
    const MAX_PIECES: usize = 4000;
    let mut pieces: Vec<(f64, f64, f64, f64)> = edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    if pieces.is_empty() {
        return 0.0;
    }
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= tol.max(1e-14 * total.abs()) || pieces.len() >= MAX_PIECES {
            return total;
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.total_cmp(&pieces[j].3))
            .unwrap();
        let (lo, hi, _, _) = pieces[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return total;
        }
        let (lv, le) = gk15(&f, lo, mid);
        let (rv, re) = gk15(&f, mid, hi);
        pieces[worst] = (lo, mid, lv, le);
        pieces.push((mid, hi, rv, re));
    }
}

/// `P(X1 >= x, X2 >= x)` for standard Gaussians with correlation `t`.
///
/// Computed as `int_x^inf phi(z) P(Z >= (x - t z) / sqrt(1 - t^2)) dz`,
/// rescaled by the integrand's peak so the result carries relative accuracy
/// even deep in the tail.
pub fn orthant_prob(t: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) || t.is_nan() {
        return Err(NkError::Domain(format!("correlation {t} outside [-1, 1]")));
    }
    if t == 1.0 {
        return Ok(gauss_sf(x));
    }
    if t == -1.0 {
        return Ok((gauss_sf(x) - gauss_sf(-x)).max(0.0));
    }
    let rho = (1.0 - t * t).sqrt();
    let log_f = |z: f64| -0.5 * z * z - LN_SQRT_2PI + ln_gauss_sf((x - t * z) / rho);

    // The integrand is log-concave; locate its maximum on [x, inf).
    let mut hi = x + 1.0;
    while log_f(hi) > log_f(hi - 1e-6) {
        hi = x + 2.0 * (hi - x);
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x, hi);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if log_f(c) >= log_f(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-12 * (1.0 + x.abs()) {
            break;
        }
    }
    let mode = 0.5 * (a + b);
    let peak = log_f(mode).max(log_f(x));

    // Upper cutoff where the integrand has fallen by e^-60.
    let mut step = 1.0;
    hi = mode.max(x) + step;
    while log_f(hi) > peak - 60.0 {
        step *= 2.0;
        hi = mode.max(x) + step;
    }
    // Breakpoints spaced geometrically away from the mode on the integrand's
    // natural scale.
    let width = 0.25 / (1.0 + x.abs().max(mode.abs()));
    let mut edges = vec![x];
    let mut left = Vec::new();
    let mut w = width;
    while mode - w > x {
        left.push(mode - w);
        w *= 2.0;
    }
    edges.extend(left.into_iter().rev());
    if mode > x {
        edges.push(mode);
    }
    let base = mode.max(x);
    let mut w = width;
    while base + w < hi {
        edges.push(base + w);
        w *= 2.0;
    }
    edges.push(hi);
    let scaled = |z: f64| (log_f(z) - peak).exp();
    let total = integrate_from(scaled, &edges, 1e-15);
    Ok(total * peak.exp())
}

/// Normal-comparison bound `P(Z >= s sqrt(N))^2 + arcsin(t) e^{-s^2 N / (1 + t)} / (2 pi)`.
pub fn lemma2_3_bound(t: f64, s: f64, n: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(NkError::Domain(format!("correlation {t} outside [-1, 1]")));
    }
    let p = gauss_sf(s * n.sqrt());
    Ok(p * p + t.asin() / (2.0 * PI) * (-s * s * n / (1.0 + t)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_anchors() {
        assert_eq!(gauss_sf(0.0), 0.5);
        assert!((gauss_sf(1.96) - 0.024_997_895_148_220_435).abs() < 1e-15);
        // P(Z >= 10) = 7.619853024160526e-24
        assert!((gauss_sf(10.0) / 7.619_853_024_160_526e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_tail_is_continuous_across_the_switch() {
        let below = gauss_sf(19.999_999_9).ln();
        let above = ln_gauss_sf(20.0);
        assert!((below - above).abs() < 1e-5);
        // ln P(Z >= 20) = -203.91715537109705
        assert!((ln_gauss_sf(20.0) + 203.917_155_371_097_05).abs() < 1e-9);
        assert!((ln_gauss_sf(19.0) - gauss_sf(19.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn mills_is_a_lower_bound() {
        for si in 1..40 {
            for n in [1.0, 5.0, 20.0, 100.0] {
                let s = si as f64 * 0.05;
                assert!(mills_lower(s, n) <= gauss_sf(s * f64::sqrt(n)));
            }
        }
    }

    #[test]
    fn quadrature_exact_on_polynomials() {
        let v = integrate(|x| x.powi(6) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14);
        let exact = (2f64.powi(7) + 1.0) / 7.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-12);
        let g = integrate(gauss_pdf, -10.0, 10.0, 1e-15);
        assert!((g - 1.0).abs() < 1e-13);
    }

    #[test]
    fn orthant_anchors() {
        assert!((orthant_prob(0.0, 0.0).unwrap() - 0.25).abs() < 1e-13);
        assert!((orthant_prob(0.5, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for t in [-0.9, -0.4, 0.2, 0.7, 0.95] {
            let exact = 0.25 + f64::asin(t) / (2.0 * PI);
            assert!((orthant_prob(t, 0.0).unwrap() - exact).abs() < 1e-12);
        }
        for x in [-2.0, 0.3, 4.0] {
            assert_eq!(orthant_prob(1.0, x).unwrap(), gauss_sf(x));
            let indep = gauss_sf(x) * gauss_sf(x);
            assert!((orthant_prob(0.0, x).unwrap() - indep).abs() < 1e-13);
        }
        assert_eq!(orthant_prob(-1.0, 0.5).unwrap(), 0.0);
        assert!(
            (orthant_prob(-1.0, -1.0).unwrap() - (gauss_sf(-1.0) - gauss_sf(1.0))).abs() < 1e-15
        );
        assert!(orthant_prob(1.2, 0.0).is_err());
    }

    #[test]
    fn orthant_deep_tail_matches_high_precision_reference() {
        // References from 50-digit quadrature with dense breakpoints (t = 0.3, s = 0.8, x = s sqrt(N)).
        let cases = [
            (50.0, 1.646_117_621_446_741_5e-13),
            (200.0, 3.726_477_250_111_955e-46),
            (800.0, 4.932_294_067_983_065e-175),
        ];
        for (n, reference) in cases {
            let p = orthant_prob(0.3, 0.8 * f64::sqrt(n)).unwrap();
            assert!(
                (p / reference - 1.0).abs() < 1e-9,
                "N = {n}: {p} vs {reference}"
            );
        }
    }

    #[test]
    fn orthant_monotone_in_correlation() {
        for x in [-1.0, 0.0, 0.8, 2.5] {
            let mut prev = 0.0;
            for i in -19..=19 {
                let p = orthant_prob(i as f64 / 20.0, x).unwrap();
                assert!(p >= prev - 1e-15, "x = {x}, t = {}", i as f64 / 20.0);
                prev = p;
            }
        }
    }
}
