use std::collections::HashMap;

use phicantor::words::{
    count_greedy, enumerate_greedy, fibonacci, greedy_counts_recursive, level_partition,
    GreedyState,
};
use phicantor::{GoldenInt, Word};
use proptest::prelude::*;

fn all_words(n: usize) -> impl Iterator<Item = Word> {
    (0u64..1 << n).map(move |b| Word::from_bits(b, n).unwrap())
}

fn fib(n: usize) -> u128 {
    fibonacci(n as u32).unwrap()
}

#[test]
fn normalization_exhaustive() {
    for n in 0..=14 {
        // Brute-force lexicographic maximum of each value class.
        let mut best: HashMap<GoldenInt, Word> = HashMap::new();
        for w in all_words(n) {
            let v = w.scaled_value().unwrap();
            let e = best.entry(v).or_insert(w);
            if w > *e {
                *e = w;
            }
        }
        for w in all_words(n) {
            let g = w.normalize_to_greedy();
            assert_eq!(g.len(), n);
            assert!(g.is_greedy(), "{w} -> {g}");
            assert_eq!(g.value_of().unwrap(), w.value_of().unwrap(), "{w} -> {g}");
            assert_eq!(g, best[&w.scaled_value().unwrap()], "{w}");
        }
    }
}

#[test]
fn greedy_predicate_matches_substring_search() {
    for n in 0..=12 {
        for w in all_words(n) {
            assert_eq!(w.is_greedy(), !w.to_string().contains("011"), "{w}");
            assert_eq!(GreedyState::of(&w).is_some(), w.is_greedy(), "{w}");
        }
    }
}

#[test]
fn enumeration_is_sorted_and_complete() {
    for n in 0..=14 {
        let listed: Vec<Word> = enumerate_greedy(n).unwrap().collect();
        let filtered: Vec<Word> = all_words(n).filter(Word::is_greedy).collect();
        assert_eq!(listed, filtered, "n={n}");
    }
}

#[test]
fn counts_through_level_25() {
    for n in 1..=25 {
        let part = level_partition(n).unwrap();
        assert_eq!(part.total as u128, fib(n + 3) - 1, "n={n}");
        assert_eq!(count_greedy(n), fib(n + 3) - 1, "n={n}");
        assert_eq!(part.ending_in_one as u128, fib(n + 1), "n={n}");
        assert_eq!(part.count_g0 as u128, fib(n + 1) - 1, "n={n}");
        assert_eq!(part.counts.values().sum::<u64>(), part.total);
        let rec = greedy_counts_recursive(n);
        assert_eq!(
            (rec.total, rec.g0, rec.gh),
            (part.total as u128, part.count_g0 as u128, part.count_gh as u128),
            "n={n}"
        );
        if n < 25 {
            let next = level_partition(n + 1).unwrap();
            assert_eq!(next.count_g0, part.count_gh, "n={n}");
        }
    }
}

#[test]
fn suffix_classes_partition_each_level() {
    for n in 1..=16 {
        let part = level_partition(n).unwrap();
        let mut seen = 0u64;
        for w in enumerate_greedy(n).unwrap() {
            let h = w.suffix_class().unwrap();
            let expected = if h < 0 {
                Word::zeros(n).unwrap()
            } else {
                let h = h as usize;
                w.prefix(n - h - 1).concat(Word::from_bits(1 << h, h + 1).unwrap()).unwrap()
            };
            assert_eq!(w, expected);
            seen += 1;
        }
        assert_eq!(seen, part.total);
        assert_eq!(part.counts.keys().copied().min(), Some(-1));
        assert_eq!(part.counts.keys().copied().max(), Some(n as i32 - 1));
    }
}

proptest! {
    #[test]
    fn normalize_preserves_value_for_long_words(bits in any::<u64>(), n in 1usize..=60) {
        let w = Word::from_bits(bits & ((1u64 << n) - 1), n).unwrap();
        let g = w.normalize_to_greedy();
        prop_assert!(g.is_greedy());
        prop_assert!(g >= w);
        prop_assert_eq!(g.scaled_value().unwrap(), w.scaled_value().unwrap());
    }

    #[test]
    fn text_round_trip(bits in any::<u64>(), n in 0usize..=64) {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let w = Word::from_bits(bits & mask, n).unwrap();
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        prop_assert_eq!(w.reversed().reversed(), w);
        let json = serde_json::to_string(&w).unwrap();
        prop_assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), w);
    }
}
