use phicantor::intervals::{
    distinct_intervals, interval_of, intersection, intersection_length, level_length,
    verify_intersection_spectrum, SpectrumValue,
};
use phicantor::words::{enumerate_greedy, fibonacci};
use phicantor::{GoldenInt, GoldenRational, Word};
use proptest::prelude::*;

fn all_words(n: usize) -> Vec<Word> {
    (0u64..1 << n).map(|b| Word::from_bits(b, n).unwrap()).collect()
}

#[test]
fn intervals_stay_inside_the_attractor_hull() {
    let phi = GoldenRational::from_golden_int(GoldenInt::PHI);
    for n in 1..=14 {
        for w in all_words(n) {
            let iv = interval_of(&w).unwrap();
            assert!(iv.left >= GoldenRational::ZERO, "{w}");
            assert!(iv.right().unwrap() <= phi, "{w}");
        }
    }
}

#[test]
fn distinct_intervals_are_greedy_intervals() {
    for n in 1..=14 {
        let all = distinct_intervals(&all_words(n)).unwrap();
        assert_eq!(all.len() as u128, fibonacci(n as u32 + 3).unwrap() - 1, "n={n}");
        let greedy: Vec<Word> = enumerate_greedy(n).unwrap().collect();
        assert_eq!(distinct_intervals(&greedy).unwrap(), all, "n={n}");
    }
}

#[test]
fn spectrum_through_level_8() {
    for n in 1..=8u32 {
        let r = verify_intersection_spectrum(n).unwrap();
        assert!(r.passed(), "n={n}: {:?}", r.violations);
        let words = 1u64 << n;
        assert_eq!(r.pairs, words * (words - 1) / 2);
        // Coinciding pairs: Σ C(#[c], 2) over classes.
        let coincide: u64 = phicantor::classes::level_multiplicities(n as usize)
            .unwrap()
            .iter()
            .map(|c| c.multiplicity * (c.multiplicity - 1) / 2)
            .sum();
        assert_eq!(r.counts.get(&SpectrumValue::NMinusOne).copied().unwrap_or(0), coincide);
    }
}

proptest! {
    #[test]
    fn intersection_is_symmetric_and_bounded(x in any::<u64>(), y in any::<u64>(), n in 1usize..=40) {
        let mask = (1u64 << n) - 1;
        let a = interval_of(&Word::from_bits(x & mask, n).unwrap()).unwrap();
        let b = interval_of(&Word::from_bits(y & mask, n).unwrap()).unwrap();
        let ab = intersection_length(&a, &b).unwrap();
        prop_assert_eq!(ab, intersection_length(&b, &a).unwrap());
        prop_assert!(ab >= GoldenRational::ZERO);
        prop_assert!(ab <= level_length(n as u32).unwrap());
        prop_assert_eq!(intersection(&a, &b).unwrap().is_some(), ab > GoldenRational::ZERO);
    }
}
