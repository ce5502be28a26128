//! Hash-to-Gaussian map for fitness components.
//!
//! `(seed, locus, word)` is folded into a 64-bit state by three absorption
//! rounds of the SplitMix64 finalizer, mapped to a uniform on (0, 1) and pushed
//! through Wichura's AS241 (PPND16) inverse normal CDF. Nothing here depends on
//! platform-specific math beyond `ln` and `sqrt`.

use crate::rng::{absorb, mix64, unit_open, DOMAIN_DISORDER};

/// Standard Gaussian deviate attached to `(seed, locus, word)`.
#[inline]
pub fn component_deviate(seed: u64, locus: usize, word: u64) -> f64 {
    let h = absorb(
        absorb(absorb(mix64(DOMAIN_DISORDER), seed), locus as u64),
        word,
    );
    inverse_normal_cdf(unit_open(h))
}

#[inline]
fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

// Coefficients as published, digits kept verbatim.
#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608_0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_90,
    5.769_497_221_460_691_405_50,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_40,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_20,
    5.463_784_911_164_114_369_90,
    1.784_826_539_917_291_335_80,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// AS241 inverse of the standard normal CDF, accurate to about 1e-16
/// relative. `p` must lie in (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cdf(x: f64) -> f64 {
        0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }

    #[test]
    fn matches_reference_quantiles() {
        // 0.975 -> 1.959963984540054, 0.5 -> 0, 1e-10 -> -6.361340902404056
        assert_eq!(inverse_normal_cdf(0.5), 0.0);
        assert!((inverse_normal_cdf(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((inverse_normal_cdf(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
    }

    #[test]
    fn roundtrips_through_the_cdf() {
        for k in 1..2000 {
            let p = k as f64 / 2000.0;
            let x = inverse_normal_cdf(p);
            assert!((cdf(x) - p).abs() < 2e-16, "p = {p}");
        }
        for e in 2..300 {
            let p = 10f64.powi(-e / 10 - 1);
            let x = inverse_normal_cdf(p);
            assert!(((cdf(x) - p) / p).abs() < 1e-13, "p = {p}");
        }
    }

    #[test]
    fn antisymmetric() {
        for k in 1..500 {
            let p = k as f64 / 1000.0;
            assert!((inverse_normal_cdf(p) + inverse_normal_cdf(1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn frozen_values() {
        // Changing the hash or the word encoding changes every landscape.
        let a = component_deviate(7, 0, 0);
        assert_eq!(a, component_deviate(7, 0, 0));
        assert_ne!(a, component_deviate(7, 0, 1));
        assert_ne!(a, component_deviate(7, 1, 0));
        assert_ne!(a, component_deviate(8, 0, 0));
    }
}
