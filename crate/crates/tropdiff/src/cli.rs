//! Command-line interface: validation, lifting, tropicalization, round
//! trips, annulus normalization and the torsor self-checks, with JSON or
//! text reports.
//!
//! Exit codes: 0 success / all checks pass, 1 semantic failure (a validation
//! fail, a round-trip mismatch, data that cannot be normalized or lifted),
//! 2 malformed input or structural error, 3 internal invariant violation.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::annulus::good_coordinate;
use crate::complex::{global_residue_check, validate};
use crate::error::{Error, Result};
use crate::formats;
use crate::lifting::{datum_matches, lift, DEFAULT_WINDOW};
use crate::model::tropicalize;
use crate::puiseux::{PuiseuxScalar, DEFAULT_PREC};
use crate::rational::{Rational, Val};
use crate::report::ValidationReport;
use crate::torsor::{act, connecting_element, gn_compose, verify_group_law, FormalForm, GnElement};

#[derive(Parser)]
#[command(
    name = "tropdiff",
    about = "Exact computations with differential forms on non-archimedean curves",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Working precision in exponent units for truncated series input.
    #[arg(long, global = true, default_value_t = DEFAULT_PREC)]
    precision: i64,
    /// Index window for series expansions on chart annuli.
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOW)]
    window: i64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0x7060)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check a reduction datum against all compatibility conditions.
    Validate {
        file: PathBuf,
        /// Also run the global residue condition at this level threshold.
        #[arg(long)]
        grc: Option<Rational>,
    },
    /// Lift a validated genus-0 datum to a glued model.
    Lift {
        file: PathBuf,
        /// Output path for the model (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read the reduction datum off a glued model.
    Tropicalize {
        file: PathBuf,
        /// Output path for the datum (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Lift a datum, tropicalize the result, and compare exactly.
    Roundtrip { file: PathBuf },
    /// Normalize an annulus form to a binomial in a good coordinate.
    GoodCoord { file: PathBuf },
    /// Randomized group-law and transitivity checks for the coordinate
    /// torsor.
    TorsorCheck {
        /// Negative log-order parameter; all of 1, 2, 3 when omitted.
        #[arg(long)]
        l: Option<i64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Structural(_) | Error::InfiniteSlopeMismatch { .. } => 2,
        Error::NonConvergent(_) | Error::NormViolation(_) => 3,
        _ => 1,
    }
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Structural(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Error::Structural(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn emit_report(report: &ValidationReport, format: Format) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serialization cannot fail")
        ),
        Format::Text => print!("{report}"),
    }
}

/// 2 if any structural check failed, 1 for any other failure, else 0.
fn report_exit(report: &ValidationReport) -> i32 {
    if !report.failures_for("structure/").is_empty() {
        2
    } else if !report.passed() {
        1
    } else {
        0
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Validate { file, grc } => {
            let datum = formats::datum_from_str(&read(file)?)?;
            let mut report = validate(&datum);
            if let Some(level) = grc {
                if report.passed() {
                    report.merge(global_residue_check(&datum, level)?);
                }
            }
            emit_report(&report, cli.global.format);
            Ok(report_exit(&report))
        }
        Command::Lift { file, output } => {
            let datum = formats::datum_from_str(&read(file)?)?;
            let model = lift(&datum, cli.global.window)?;
            write_out(output, &formats::model_to_string(&model))?;
            Ok(0)
        }
        Command::Tropicalize { file, output } => {
            let model = formats::model_from_str(&read(file)?)?;
            let datum = tropicalize(&model, cli.global.window)?;
            write_out(output, &formats::datum_to_string(&datum))?;
            Ok(0)
        }
        Command::Roundtrip { file } => {
            let datum = formats::datum_from_str(&read(file)?)?;
            let model = lift(&datum, cli.global.window)?;
            let back = tropicalize(&model, cli.global.window)?;
            let ok = datum_matches(&back, &datum);
            match cli.global.format {
                Format::Json => println!("{}", json!({ "roundtrip": ok })),
                Format::Text => println!("roundtrip: {}", if ok { "exact" } else { "MISMATCH" }),
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::GoodCoord { file } => {
            let mut form = formats::annulus_form_from_str(&read(file)?)?;
            // cap the coefficients at the working precision
            let prec = Val::Finite(Rational::from_int(cli.global.precision));
            let skel = form.skeleton().clone();
            let capped: Vec<(i64, PuiseuxScalar)> = form
                .series
                .stored()
                .map(|(i, c)| (*i, c.truncated(&prec)))
                .collect();
            form = crate::annulus::AnnulusForm::new(crate::annulus::AnnulusSeries::new(
                skel,
                form.series.window(),
                capped,
            )?);
            let gc = good_coordinate(&form)?;
            let unit_json = json!({
                "coeffs": gc.change.unit.stored().map(|(i, c)| json!([i, c])).collect::<Vec<_>>(),
                "window": gc.change.unit.window(),
            });
            let gaps: Vec<String> = gc.gaps.iter().map(|g| g.to_string()).collect();
            match cli.global.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "n": gc.n,
                        "c_n": gc.c_n,
                        "c_0": gc.c_0,
                        "iterations": gc.iterations,
                        "gaps": gaps,
                        "unit": unit_json,
                    }))
                    .expect("serialization cannot fail")
                ),
                Format::Text => {
                    println!("slope n       = {}", gc.n);
                    println!("c_n           = {}", gc.c_n);
                    println!("c_0 (residue) = {}", gc.c_0);
                    println!("iterations    = {}", gc.iterations);
                    println!("gaps          = [{}]", gaps.join(", "));
                    println!("unit          = {}", gc.change.unit);
                }
            }
            Ok(0)
        }
        Command::TorsorCheck { l, trials } => {
            let ls: Vec<i64> = match l {
                Some(l) => vec![*l],
                None => vec![1, 2, 3],
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.global.seed);
            let rand_nonzero = |rng: &mut ChaCha8Rng| loop {
                let n = rng.gen_range(-9i64..=9);
                let d = rng.gen_range(1i64..=4);
                if n != 0 {
                    return Rational::new(n, d);
                }
            };
            let mut failures = 0usize;
            let mut results = BTreeMap::new();
            for &l in &ls {
                if l < 1 {
                    return Err(Error::Structural(format!("l must be positive, got {l}")));
                }
                let mut ok = 0usize;
                for _ in 0..*trials {
                    let form = FormalForm::new(-l, rand_nonzero(&mut rng), rand_nonzero(&mut rng));
                    let s1 = GnElement::new(rand_nonzero(&mut rng), rand_nonzero(&mut rng));
                    let s2 = GnElement::new(rand_nonzero(&mut rng), rand_nonzero(&mut rng));
                    let law = verify_group_law(&form, &s1, &s2, 12)?;
                    let transitive = {
                        let t1 = act(&s1, &form, 12)?;
                        let t2 = act(&s2, &form, 12)?;
                        let sigma = connecting_element(&form, &t1, &t2)?;
                        gn_compose(&s1, &sigma, l) == s2
                    };
                    if law && transitive {
                        ok += 1;
                    } else {
                        failures += 1;
                    }
                }
                results.insert(l, ok);
            }
            match cli.global.format {
                Format::Json => println!(
                    "{}",
                    json!({ "trials": trials, "passed": results, "failures": failures })
                ),
                Format::Text => {
                    for (l, ok) in &results {
                        println!("l = {l}: {ok}/{trials} group-law + transitivity checks passed");
                    }
                }
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}
