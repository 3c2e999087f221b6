//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use phicantor::classes::{
    check_prop2, histogram, histogram_family, multiplicity, Backend, OracleTable,
};
use phicantor::expected::{
    check_recursion_bounds, default_grid, dimension_estimate, dimension_formula,
    expected_count_paper, expected_count_tree, Bound,
};
use phicantor::intervals::{distinct_intervals, verify_intersection_spectrum};
use phicantor::simulate::{extinction_by_level, extinction_limit, monte_carlo};
use phicantor::words::{enumerate_greedy, fibonacci};
use phicantor::{GoldenInt, GoldenRational, Word};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn fib_minus_one(n: usize) -> u128 {
    fibonacci(n as u32 + 3).unwrap() - 1
}

fn all_words(n: usize) -> Vec<Word> {
    (0u64..1 << n).map(|b| Word::from_bits(b, n).unwrap()).collect()
}

fn counting() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 1..=25 {
        let count = enumerate_greedy(n).unwrap().count() as u128;
        if count != fib_minus_one(n) {
            bad.push(format!("greedy n={n}: {count}"));
        }
    }
    for n in 1..=16 {
        let distinct = distinct_intervals(&all_words(n)).unwrap().len() as u128;
        if distinct != fib_minus_one(n) {
            bad.push(format!("intervals n={n}: {distinct}"));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && elapsed < Duration::from_secs(60),
        format!("#G_n = F_(n+3)-1 for n<=25, distinct intervals for n<=16; mismatches {bad:?}; {elapsed:.2?} (limit 60s)"),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for n in 1..=16 {
        let table = OracleTable::build(n).unwrap();
        for g in enumerate_greedy(n).unwrap() {
            let brute = table.members(&g).unwrap().len() as u64;
            if multiplicity(&g).unwrap() != brute {
                bad.push(g.to_string());
            }
            checked += 1;
        }
    }
    for h in 0..=30usize {
        let w: Word = format!("1{}", "0".repeat(h)).parse().unwrap();
        if multiplicity(&w).unwrap() != 1 + h as u64 / 2 {
            bad.push(w.to_string());
        }
    }
    verdict(
        bad.is_empty(),
        format!("DP = brute force on {checked} greedy words (n<=16), #[1 0^h] = 1+h/2 for h<=30; mismatches {bad:?}"),
    )
}

fn mass_identities() -> Verdict {
    let mut bad = Vec::new();
    for h in histogram_family(25).unwrap() {
        if h.total_words() != 1u128 << h.n || h.total_classes() != fib_minus_one(h.n) {
            bad.push(h.n);
        }
    }
    verdict(
        bad.is_empty(),
        format!("sum m*N_n(m) = 2^n and sum N_n(m) = F_(n+3)-1 for n<=25; failing levels {bad:?}"),
    )
}

fn prop2() -> Verdict {
    let oracle = check_prop2(14, Backend::Oracle).unwrap();
    let dp = check_prop2(18, Backend::Dp).unwrap();
    verdict(
        oracle.passed() && dp.passed(),
        format!(
            "oracle n<=14: {} violations over {:?} checks; DP n<=18: {} violations over {:?} checks",
            oracle.violations.len(),
            oracle.checked,
            dp.violations.len(),
            dp.checked
        ),
    )
}

fn spectrum() -> Verdict {
    let start = Instant::now();
    let mut violations = 0;
    let mut pairs = 0;
    for n in 1..=10 {
        let r = verify_intersection_spectrum(n).unwrap();
        violations += r.violations.len();
        pairs += r.pairs;
    }
    let elapsed = start.elapsed();
    verdict(
        violations == 0 && elapsed < Duration::from_secs(120),
        format!("{pairs} pairs for n<=10, {violations} lengths outside the spectrum; {elapsed:.2?} (limit 120s)"),
    )
}

fn small_closed_forms() -> Verdict {
    let (h1, h2) = (histogram(1).unwrap(), histogram(2).unwrap());
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        worst = worst
            .max((expected_count_paper(1, p, &h1).unwrap() - 2.0 * p).abs())
            .max((expected_count_paper(2, p, &h2).unwrap() - 4.0 * p * p).abs());
    }
    verdict(worst <= 1e-12, format!("E_1 = 2p, E_2 = 4p^2 at 101 points; max error {worst:e} (tol 1e-12)"))
}

fn bounds() -> Verdict {
    let hists = histogram_family(25).unwrap();
    let grid = default_grid();
    let mut fails = [0usize; 3];
    let mut worst = [0.0f64; 3];
    let mut first_recursion_fail = None;
    for n in 3..=25 {
        let r = check_recursion_bounds(n, &grid, &hists).unwrap();
        for (i, b) in [Bound::Upper, Bound::Recursion, Bound::FinalLower].into_iter().enumerate() {
            for v in r.violations_of(b) {
                fails[i] += 1;
                worst[i] = worst[i].min(v.margin);
                if b == Bound::Recursion && first_recursion_fail.is_none() {
                    first_recursion_fail = Some((n, v.p));
                }
            }
        }
    }
    verdict(
        fails == [0, 0, 0],
        format!(
            "n in 3..=25 over {} grid points; violations: upper {} (worst {:e}), recursion {} (worst {:e}, first at n,p = {:?}), final lower {} (worst {:e})",
            grid.len(),
            fails[0],
            worst[0],
            fails[1],
            worst[1],
            first_recursion_fail,
            fails[2],
            worst[2]
        ),
    )
}

fn convergence() -> Verdict {
    let start = Instant::now();
    let h28 = histogram(28).unwrap();
    let h28_time = start.elapsed();
    let hists = [histogram(16).unwrap(), histogram(20).unwrap(), histogram(24).unwrap(), h28];
    let mut ok = h28_time < Duration::from_secs(600);
    let mut lines = Vec::new();
    for p in [0.55, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let f = dimension_formula(p).unwrap();
        let errs: Vec<f64> = hists
            .iter()
            .map(|h| (dimension_estimate(h.n, p, h).unwrap() - f).abs())
            .collect();
        let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
        ok &= errs[3] <= 0.08 && monotone;
        lines.push(format!("p={p}: {:.4?}", errs));
    }
    verdict(
        ok,
        format!(
            "errors at n=16,20,24,28 (tol 0.08 at n=28, nonincreasing): {}; histogram(28) in {h28_time:.2?} (limit 600s)",
            lines.join("; ")
        ),
    )
}

fn monte_carlo_vs_tree() -> Verdict {
    let s = monte_carlo(12, 0.7, 10_000, 20_240_601).unwrap();
    let tree = expected_count_tree(12, 0.7).unwrap();
    let paper = expected_count_paper(12, 0.7, &histogram(12).unwrap()).unwrap();
    let dev = s.mean_distinct - tree;
    verdict(
        dev.abs() <= 4.0 * s.std_err,
        format!(
            "mean {:.4} vs exact {:.4} (deviation {dev:.4}, 4*se {:.4}); tree - independence formula = {:.4}",
            s.mean_distinct,
            tree,
            4.0 * s.std_err,
            tree - paper
        ),
    )
}

fn extinction() -> Verdict {
    let s = monte_carlo(40, 0.45, 10_000, 7).unwrap();
    let q40 = extinction_by_level(0.45, 40);
    let mc_ok = (s.extinction_freq - q40).abs() <= 0.02;
    let mut parts = vec![format!("p=0.45 n=40: freq {:.4} vs q_40 {:.4} (tol 0.02)", s.extinction_freq, q40)];
    let mut ok = mc_ok;
    for p in [0.3, 0.45, 0.5] {
        let q = extinction_by_level(p, 2000);
        ok &= q >= 0.999;
        parts.push(format!("q_2000({p}) = {q:.6} (need >= 0.999)"));
    }
    let q7 = extinction_by_level(0.7, 2000);
    let lim = extinction_limit(0.7);
    ok &= (q7 - lim).abs() <= 1e-9;
    parts.push(format!("p=0.7: q_2000 - ((1-p)/p)^2 = {:e} (tol 1e-9)", q7 - lim));
    verdict(ok, parts.join("; "))
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_phicantor")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}");
    out.stdout
}

fn determinism() -> Verdict {
    let args = ["simulate", "--n", "14", "--p", "0.72", "--trials", "2000", "--seed", "31337"];
    let a = run_cli(&args);
    let b = run_cli(&args);
    let mut serial_args = args.to_vec();
    serial_args.push("--serial");
    let c = run_cli(&serial_args);
    verdict(
        a == b && a == c,
        format!(
            "two runs identical: {}; serial matches parallel: {}; output {}",
            a == b,
            a == c,
            String::from_utf8_lossy(&a).trim()
        ),
    )
}

fn figure_one() -> Verdict {
    let text = run_cli(&["bands", "--deterministic", "--n", "2"]);
    let mut rdr = csv::Reader::from_reader(text.as_slice());
    let rows: Vec<phicantor::simulate::BandRow> =
        rdr.deserialize().collect::<Result<_, _>>().unwrap();
    let gr = |a, b| GoldenRational::from_golden_int(GoldenInt::new(a, b));
    let at = |r: &phicantor::simulate::BandRow| {
        (
            r.kind.clone(),
            GoldenRational::new(GoldenInt::new(r.left_a, r.left_b), r.left_scale).unwrap(),
            GoldenRational::new(GoldenInt::new(r.right_a, r.right_b), r.right_scale).unwrap(),
        )
    };
    let got: Vec<_> = rows.iter().filter(|r| r.level == 2).map(at).collect();
    let iv = |l, r| ("interval".to_string(), l, r);
    let ov = |l, r| ("overlap".to_string(), l, r);
    // 1/φ = φ - 1, 1/φ² = 2 - φ, 2/φ = 2φ - 2
    let want = vec![
        iv(gr(0, 0), gr(-1, 1)),
        iv(gr(2, -1), gr(1, 0)),
        iv(gr(-1, 1), gr(-2, 2)),
        iv(gr(1, 0), gr(0, 1)),
        ov(gr(2, -1), gr(-1, 1)),
        ov(gr(-1, 1), gr(1, 0)),
        ov(gr(1, 0), gr(-2, 2)),
    ];
    verdict(
        got == want,
        format!("level 2: {} intervals, {} overlaps, exact match {}",
            got.iter().filter(|g| g.0 == "interval").count(),
            got.iter().filter(|g| g.0 == "overlap").count(),
            got == want),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("1 counting", counting),
        ("2 multiplicity oracle", oracle_equivalence),
        ("3 mass identities", mass_identities),
        ("4 class-size relations", prop2),
        ("5 intersection spectrum", spectrum),
        ("6 small-n closed forms", small_closed_forms),
        ("7 bounds and recursion", bounds),
        ("8 dimension convergence", convergence),
        ("9 Monte Carlo vs exact", monte_carlo_vs_tree),
        ("10 extinction threshold", extinction),
        ("11 determinism", determinism),
        ("12 figure-1 bands", figure_one),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked"));
        if !v.ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2?}]",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
