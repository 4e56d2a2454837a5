use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robba::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "robba", version, about = "Slopes of Frobenius modules over truncated p-adic Laurent series")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Absolute p-adic precision N.
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    /// u-exponent window, e.g. -64:256.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_window)]
    pub window: Option<(i64, i64)>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Instances per selftest suite, relative to 50 for the full sizes.
    #[arg(long, global = true, default_value_t = 50)]
    pub instances: usize,
    /// Residual valuation the computation must certify.
    #[arg(long, global = true)]
    pub target: Option<i64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Newton polygon of an element.
    Polygon { input: PathBuf },
    /// y = q x + z with z of smaller height.
    Divrem { input: PathBuf },
    /// Generic slope polygon through a cyclic vector.
    HnGeneric { input: PathBuf },
    /// Special slope polygon by specializing at u = 0.
    HnSpecial { input: PathBuf },
    /// Both polygons and whether the special one lies above.
    Compare { input: PathBuf },
    /// Clear the lower triangle of A D^-1 - I by Frobenius conjugation.
    Triangularize { input: PathBuf },
    /// Move the nonpositive p-digits of A D^-1 - I into the change of basis.
    Goodmodel { input: PathBuf },
    /// Solve y - p^n sigma(y) = x.
    SolveH1 { input: PathBuf },
    /// Twist, dual, tensor, direct sum, wedge, pushforward or pullback.
    ModuleAlgebra { input: PathBuf },
    /// Run every property suite at a scaled size.
    Selftest,
    /// Compare the polygons of F v1 = v2, F v2 = p v1 + u v2.
    #[command(name = "example-7-3")]
    Example73,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse::<i64>().map_err(|e| format!("LO: {e}"))?;
    let hi = hi.trim().parse::<i64>().map_err(|e| format!("HI: {e}"))?;
    if lo >= hi {
        return Err("LO must be below HI".into());
    }
    Ok((lo, hi))
}

pub mod exit {
    pub const FAILURE: u8 = 1;
    pub const PARSE: u8 = 3;
    pub const INVARIANT: u8 = 4;
    pub const HYPOTHESIS: u8 = 5;
    pub const PRECISION: u8 = 6;
    pub const VIOLATION: u8 = 7;
}

/// What went wrong, with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(String),
    /// A computed report that falsifies a checked property.
    Violation(serde_json::Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => exit::PARSE,
            Failure::Violation(_) => exit::VIOLATION,
            Failure::Lib(e) => match e {
                Error::Parse(_) => exit::PARSE,
                Error::InvariantViolation(_) | Error::InvalidArgument(_) | Error::InvalidContext(_) => exit::INVARIANT,
                Error::HypothesisFailed(_) | Error::BadOverlap(_) | Error::NegativeSupport => exit::HYPOTHESIS,
                Error::PrecisionExhausted(_)
                | Error::SingularAtPrecision
                | Error::WindowOverflow(_)
                | Error::NoCyclicVectorFound(_) => exit::PRECISION,
                _ => exit::FAILURE,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            exit::PARSE => "parse_error",
            exit::INVARIANT => "invariant_violation",
            exit::HYPOTHESIS => "hypothesis_failed",
            exit::PRECISION => "precision_exhausted",
            exit::VIOLATION => "violation",
            _ => "error",
        }
    }
}

fn emit(opts: &Opts, report: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    match &opts.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<serde_json::Value, Failure> {
    let opts = &cli.opts;
    // Overrides are validated before any file is read.
    let ctx = commands::base_ctx(opts)?;
    match &cli.verb {
        Verb::Polygon { input } => commands::polygon(&ctx, opts, input),
        Verb::Divrem { input } => commands::divrem(&ctx, opts, input),
        Verb::HnGeneric { input } => commands::hn_generic(&ctx, opts, input),
        Verb::HnSpecial { input } => commands::hn_special(&ctx, opts, input),
        Verb::Compare { input } => commands::compare(&ctx, opts, input),
        Verb::Triangularize { input } => commands::triangularize(&ctx, opts, input),
        Verb::Goodmodel { input } => commands::goodmodel(&ctx, opts, input),
        Verb::SolveH1 { input } => commands::solve_h1(&ctx, opts, input),
        Verb::ModuleAlgebra { input } => commands::module_algebra(&ctx, opts, input),
        Verb::Selftest => commands::selftest(opts),
        Verb::Example73 => commands::example_7_3(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let (report, code) = match outcome {
        Ok(report) => (report, 0),
        Err(Failure::Violation(report)) => (report, exit::VIOLATION),
        Err(f) => {
            let message = match &f {
                Failure::Lib(e) => e.to_string(),
                Failure::Io(m) => m.clone(),
                Failure::Violation(_) => unreachable!(),
            };
            eprintln!("error: {message}");
            (serde_json::json!({ "error": f.kind(), "message": message }), f.code())
        }
    };
    if let Err(f) = emit(&cli.opts, &report) {
        if let Failure::Io(m) = &f {
            eprintln!("error: {m}");
        }
        return ExitCode::from(f.code());
    }
    ExitCode::from(code)
}
