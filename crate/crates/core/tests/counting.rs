use nk_core::combinatorics::{
    binomial, count_by_overlap, count_by_overlap_bruteforce, count_by_r, lemma2_bound_check,
    CountTable,
};
use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;

#[test]
fn small_tables() {
    assert_eq!(
        count_by_overlap(4, 1).unwrap().to_string(),
        "{0:7,1:4,2:4,4:1}"
    );
    assert_eq!(count_by_overlap(5, 4).unwrap().to_string(), "{0:31,5:1}");
    for n in 2..=12 {
        // the largest K is the random energy model: only Q = 0 or 1
        let t = count_by_overlap(n, n - 1).unwrap();
        assert_eq!(t.nonzero().count(), 2);
        assert_eq!(*t.get(n), BigUint::one());
    }
}

#[test]
fn json_shape() {
    let t = count_by_overlap(4, 1).unwrap();
    let v = serde_json::to_value(&t).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["counts"]["2"], "4");
    assert!(v["counts"].get("3").is_none());
}

#[test]
fn dp_reaches_64_loci() {
    let t: CountTable = count_by_overlap(64, 7).unwrap();
    assert_eq!(t.total(), BigUint::one() << 64);
    assert!(lemma2_bound_check(&t).gap_is_empty);
}

#[test]
fn magnetisation_counts() {
    for n in 1..=30usize {
        let mut total = BigUint::from(0u8);
        for j in 0..=n {
            let r = count_by_r(n, n as i64 - 2 * j as i64).unwrap();
            assert_eq!(r.count, binomial(n, j));
            assert!(r.within_bound);
            total += r.count;
        }
        assert_eq!(total, BigUint::one() << n);
    }
    assert!(count_by_r(4, 1).is_err());
}

proptest! {
    #[test]
    fn dp_equals_bruteforce(n in 2usize..=14, k_frac in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        let (dp, brute) = (count_by_overlap(n, k).unwrap(), count_by_overlap_bruteforce(n, k).unwrap());
        prop_assert_eq!(dp.counts(), brute.counts());
    }

    #[test]
    fn tables_sum_to_two_pow_n(n in 3usize..=40, k_frac in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        let t = count_by_overlap(n, k).unwrap();
        prop_assert_eq!(t.total(), BigUint::one() << n);
        prop_assert!(t.get(0) >= &BigUint::one());
    }
}
