//! The `phicantor` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check finds a violation,
//! 2 for usage errors and exceeded caps. Floats in CSV output carry 17
//! significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::classes::{
    self, check_prop2, class_members_oracle, level_multiplicities, Backend, ClassError,
    ClassRecord,
};
use crate::expected::{
    self, check_recursion_bounds, default_grid, dimension_estimate, dimension_formula,
    expected_count_paper, expected_count_tree, ExpectedError,
};
use crate::intervals::{distinct_intervals, verify_intersection_spectrum, IntervalError};
use crate::simulate::{self, emit_bands, monte_carlo_with, BandMode, Execution, SimError};
use crate::words::{enumerate_greedy, fibonacci, greedy_counts_recursive, LevelPartition, Word, WordError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Expected(#[from] ExpectedError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Prop1,
    Prop2,
    Bounds,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "phicantor", version, about = "Base-φ expansions and the overlapping random Cantor set")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greedy word counts per level with the recursive split.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Class sizes of every greedy word of level n, or the class of one word.
    Classes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Multiplicity histogram N_n(m) as CSV rows (n, m, count).
    Histogram {
        #[arg(long)]
        n: usize,
    },
    /// Expected survivor counts and dimension estimates over a grid of p.
    ExpectedDim {
        #[arg(long)]
        n: usize,
        /// Comma-separated probabilities; defaults to 0.50..=1.00 step 0.05 plus φ/2.
        #[arg(long)]
        p_grid: Option<String>,
        /// Also compute the exact retention-tree expectation (n ≤ 16).
        #[arg(long)]
        tree_exact: bool,
    },
    /// Monte Carlo over seeded retention trees; prints a JSON summary.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Write the band data of the realization seeded by `--seed` to this file.
        #[arg(long)]
        emit_bands: Option<PathBuf>,
        /// Run trials on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Band data (intervals and overlaps per level) as CSV.
    Bands {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with_all = ["p", "seed"])]
        deterministic: bool,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites; exits 1 on any violation.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        n_max: usize,
    },
}

pub const COUNT_MAX: usize = 30;
pub const PROP1_MAX: usize = 16;
pub const PROP2_MAX: usize = 18;
pub const PROP2_ORACLE_MAX: usize = 14;
pub const BOUNDS_MAX: usize = 25;

fn check_cap(what: &str, n: usize, cap: usize) -> Result<(), CliError> {
    if n > cap {
        usage(format!("{what}: n = {n} exceeds the cap of {cap}"))
    } else {
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        usage(format!("probability {p} outside [0, 1]"))
    }
}

impl Command {
    /// Checks numeric parameters against the module caps before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Command::Count { n, .. } => check_cap("count", *n, COUNT_MAX),
            Command::Classes { n, word, .. } => {
                check_cap("classes", *n, classes::HISTOGRAM_MAX_LEN)?;
                if let Some(w) = word {
                    let w: Word = w.parse()?;
                    if w.len() != *n {
                        return usage(format!("word {w} has length {}, not {n}", w.len()));
                    }
                }
                Ok(())
            }
            Command::Histogram { n } => check_cap("histogram", *n, classes::HISTOGRAM_MAX_LEN),
            Command::ExpectedDim { n, p_grid, tree_exact } => {
                check_cap("expected-dim", *n, classes::HISTOGRAM_MAX_LEN)?;
                if *tree_exact {
                    check_cap("expected-dim --tree-exact", *n, expected::TREE_MAX_LEN)?;
                }
                if *n == 0 {
                    return usage("expected-dim needs n ≥ 1");
                }
                parse_grid(p_grid.as_deref())?;
                Ok(())
            }
            Command::Simulate { n, p, trials, emit_bands, .. } => {
                check_cap("simulate", *n, simulate::MAX_DEPTH)?;
                check_probability(*p)?;
                if *trials == 0 {
                    return usage("simulate needs at least one trial");
                }
                if emit_bands.is_some() {
                    check_cap("simulate --emit-bands", *n, simulate::BANDS_MAX_RANDOM)?;
                }
                Ok(())
            }
            Command::Bands { n, deterministic, p, seed, .. } => {
                if *deterministic {
                    check_cap("bands --deterministic", *n, simulate::BANDS_MAX_DETERMINISTIC)
                } else {
                    check_cap("bands", *n, simulate::BANDS_MAX_RANDOM)?;
                    match (p, seed) {
                        (Some(p), Some(_)) => check_probability(*p),
                        _ => usage("bands needs --deterministic or both --p and --seed"),
                    }
                }
            }
            Command::Verify { suite, n_max } => match suite {
                Suite::Prop1 => check_cap("verify prop1", *n_max, PROP1_MAX),
                Suite::Prop2 => check_cap("verify prop2", *n_max, PROP2_MAX),
                Suite::Bounds => check_cap("verify bounds", *n_max, BOUNDS_MAX),
                Suite::All => check_cap("verify all", *n_max, PROP1_MAX),
            },
        }
    }
}

/// Parses a comma-separated probability list; `None` gives [`default_grid`].
pub fn parse_grid(list: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(list) = list else {
        return Ok(default_grid());
    };
    let grid = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad probability {s:?} in --p-grid")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for &p in &grid {
        check_probability(p)?;
    }
    Ok(grid)
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
        }
    }

    fn and(self, other: Outcome) -> Outcome {
        if self == Outcome::Pass && other == Outcome::Pass {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }

    fn from_ok(ok: bool) -> Outcome {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }
}

#[derive(Serialize)]
struct CountRow {
    n: usize,
    count: u64,
    f_n3_minus_1: u128,
    count_g0: u64,
    count_gh: u64,
    recursion_ok: bool,
}

#[derive(Serialize)]
struct HistogramRow {
    n: usize,
    m: u64,
    count: u64,
}

#[derive(Serialize)]
struct ClassRow {
    word: Word,
    multiplicity: u64,
    members: String,
}

#[derive(Serialize)]
struct ExpectedRow {
    p: String,
    e_paper: String,
    e_tree: String,
    estimate: String,
    formula: String,
    abs_err: String,
}

fn write_rows<T: Serialize>(rows: impl IntoIterator<Item = T>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs one validated command, writing its report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    config.command.validate()?;
    match &config.command {
        Command::Count { n, format } => cmd_count(*n, *format, out),
        Command::Classes { n, word, format } => cmd_classes(*n, word.as_deref(), *format, out),
        Command::Histogram { n } => {
            let h = classes::histogram(*n)?;
            write_rows(
                h.counts.iter().map(|(&m, &count)| HistogramRow { n: *n, m, count }),
                out,
            )?;
            Ok(Outcome::Pass)
        }
        Command::ExpectedDim { n, p_grid, tree_exact } => {
            cmd_expected_dim(*n, &parse_grid(p_grid.as_deref())?, *tree_exact, out)
        }
        Command::Simulate { n, p, trials, seed, emit_bands: bands_path, serial } => {
            let exec = if *serial { Execution::Serial } else { Execution::Parallel };
            let summary = monte_carlo_with(*n, *p, *trials, *seed, exec)?;
            if let Some(path) = bands_path {
                let levels = emit_bands(*n, BandMode::Random { p: *p, seed: *seed })?;
                simulate::write_bands_csv(&levels, File::create(path)?)?;
            }
            write_json(&summary, out)?;
            Ok(Outcome::Pass)
        }
        Command::Bands { n, deterministic, p, seed, out: path } => {
            let mode = if *deterministic {
                BandMode::Deterministic
            } else {
                BandMode::Random {
                    p: p.expect("validated"),
                    seed: seed.expect("validated"),
                }
            };
            let levels = emit_bands(*n, mode)?;
            match path {
                Some(path) => simulate::write_bands_csv(&levels, File::create(path)?)?,
                None => simulate::write_bands_csv(&levels, out)?,
            }
            Ok(Outcome::Pass)
        }
        Command::Verify { suite, n_max } => cmd_verify(*suite, *n_max, out),
    }
}

/// Greedy counts per level, checked against `F_{n+3} - 1` and the recursive system.
pub fn cmd_count(n: usize, format: Format, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut outcome = Outcome::Pass;
    for k in 1..=n {
        let part = LevelPartition::from_words(k, enumerate_greedy(k)?)?;
        let f = fibonacci(k as u32 + 3).expect("k ≤ 30") - 1;
        let rec = greedy_counts_recursive(k);
        let recursion_ok = rec.total == part.total as u128
            && rec.g0 == part.count_g0 as u128
            && rec.gh == part.count_gh as u128
            && part.counts.values().sum::<u64>() == part.total;
        let ok = recursion_ok && f == part.total as u128;
        outcome = outcome.and(Outcome::from_ok(ok));
        rows.push(CountRow {
            n: k,
            count: part.total,
            f_n3_minus_1: f,
            count_g0: part.count_g0,
            count_gh: part.count_gh,
            recursion_ok,
        });
    }
    match format {
        Format::Csv => write_rows(rows, out)?,
        Format::Json => write_json(&rows, out)?,
    }
    Ok(outcome)
}

pub fn cmd_classes(
    n: usize,
    word: Option<&str>,
    format: Format,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let records: Vec<ClassRecord> = match word {
        Some(w) => {
            let w: Word = w.parse()?;
            if n <= classes::ORACLE_MAX_LEN {
                vec![class_members_oracle(&w)?]
            } else {
                vec![ClassRecord {
                    rep: w.normalize_to_greedy(),
                    multiplicity: classes::multiplicity(&w)?,
                    members: None,
                }]
            }
        }
        None => level_multiplicities(n)?,
    };
    match format {
        Format::Json => write_json(&records, out)?,
        Format::Csv => write_rows(
            records.iter().map(|r| ClassRow {
                word: r.rep,
                multiplicity: r.multiplicity,
                members: r
                    .members
                    .as_ref()
                    .map(|ms| ms.iter().map(Word::to_string).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default(),
            }),
            out,
        )?,
    }
    Ok(Outcome::Pass)
}

/// Rows `(p, E_n(p), tree expectation, estimate, formula, |estimate - formula|)`.
pub fn cmd_expected_dim(
    n: usize,
    grid: &[f64],
    tree_exact: bool,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let hist = classes::histogram(n)?;
    let mut rows = Vec::new();
    for &p in grid {
        let e = expected_count_paper(n, p, &hist)?;
        let tree = if tree_exact {
            fmt_f64(expected_count_tree(n, p)?)
        } else {
            String::new()
        };
        let formula = dimension_formula(p)?;
        let (estimate, err) = match dimension_estimate(n, p, &hist) {
            Ok(est) => (fmt_f64(est), fmt_f64((est - formula).abs())),
            Err(ExpectedError::NonPositiveCount(_)) => (String::new(), String::new()),
            Err(e) => return Err(e.into()),
        };
        rows.push(ExpectedRow {
            p: fmt_f64(p),
            e_paper: fmt_f64(e),
            e_tree: tree,
            estimate,
            formula: fmt_f64(formula),
            abs_err: err,
        });
    }
    write_rows(rows, out)?;
    Ok(Outcome::Pass)
}

fn verify_prop1(n_max: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::Pass;
    writeln!(out, "# prop1: counts, distinct intervals, intersection spectrum")?;
    for k in 1..=n_max.min(PROP1_MAX) {
        let greedy = enumerate_greedy(k)?.count() as u128;
        let f = fibonacci(k as u32 + 3).expect("small level") - 1;
        let words: Vec<Word> = (0u64..1 << k)
            .map(|b| Word::from_bits(b, k))
            .collect::<Result<_, _>>()?;
        let distinct = distinct_intervals(&words)?.len() as u128;
        let mut ok = greedy == f && distinct == f;
        let mut line = format!("n={k} greedy={greedy} distinct={distinct} expected={f}");
        if k as u32 <= crate::intervals::SPECTRUM_MAX_LEVEL {
            let r = verify_intersection_spectrum(k as u32)?;
            ok &= r.passed();
            line += &format!(
                " pairs={} spectrum={:?} violations={}",
                r.pairs,
                r.counts,
                r.violations.len()
            );
        }
        writeln!(out, "{} {line}", if ok { "PASS" } else { "FAIL" })?;
        outcome = outcome.and(Outcome::from_ok(ok));
    }
    Ok(outcome)
}

fn verify_prop2(n_max: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    writeln!(out, "# prop2: class-size relations under extension")?;
    let mut outcome = Outcome::Pass;
    let runs = [
        (Backend::Oracle, n_max.min(PROP2_ORACLE_MAX)),
        (Backend::Dp, n_max.min(PROP2_MAX)),
    ];
    for (backend, n) in runs {
        let r = check_prop2(n, backend)?;
        writeln!(
            out,
            "{} backend={:?} n<={} checked={:?} violations={}",
            if r.passed() { "PASS" } else { "FAIL" },
            backend,
            n,
            r.checked,
            r.violations.len()
        )?;
        for v in r.violations.iter().take(20) {
            writeln!(out, "  {v:?}")?;
        }
        outcome = outcome.and(Outcome::from_ok(r.passed()));
    }
    Ok(outcome)
}

fn verify_bounds(n_max: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    writeln!(out, "# bounds: upper bound, two-step recursion, final lower bound")?;
    let n_max = n_max.min(BOUNDS_MAX);
    if n_max < 3 {
        writeln!(out, "PASS nothing to check below n=3")?;
        return Ok(Outcome::Pass);
    }
    let hists = classes::histogram_family(n_max)?;
    let grid = default_grid();
    let mut outcome = Outcome::Pass;
    writeln!(out, "n,p,e_n,upper_margin,recursion_margin,final_margin")?;
    for n in 3..=n_max {
        let r = check_recursion_bounds(n, &grid, &hists)?;
        for row in &r.rows {
            writeln!(
                out,
                "{n},{},{},{},{},{}",
                fmt_f64(row.p),
                fmt_f64(row.e_n),
                fmt_f64(row.upper_margin),
                fmt_f64(row.recursion_margin),
                row.final_margin.map(fmt_f64).unwrap_or_default()
            )?;
        }
        for v in &r.violations {
            writeln!(out, "FAIL n={n} p={} {:?} margin={}", fmt_f64(v.p), v.bound, fmt_f64(v.margin))?;
        }
        outcome = outcome.and(Outcome::from_ok(r.passed()));
    }
    writeln!(out, "{}", if outcome == Outcome::Pass { "PASS bounds" } else { "FAIL bounds" })?;
    Ok(outcome)
}

pub fn cmd_verify(suite: Suite, n_max: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    Ok(match suite {
        Suite::Prop1 => verify_prop1(n_max, out)?,
        Suite::Prop2 => verify_prop2(n_max, out)?,
        Suite::Bounds => verify_bounds(n_max, out)?,
        Suite::All => verify_prop1(n_max, out)?
            .and(verify_prop2(n_max, out)?)
            .and(verify_bounds(n_max, out)?),
    })
}
