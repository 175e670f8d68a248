//! Command-line front end: `verify`, `fuzz`, `solve` and `noether` over
//! field specification files, reporting line-delimited JSON.

pub mod commands;
pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{fuzz, fuzz_trial, grid, noether, solve, verify, FuzzCheck, NoetherSource};
pub use report::{CheckRecord, Report, Status};
pub use spec::{Expectation, SpecError, SpecFile};

/// Exit status for a failed check.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "framegr", version, about = "Checks and solves first-order frame field equations")]
pub struct Cli {
    /// Omit wall-clock timing from the summary record.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the geometry and field-equation checks over a grid.
    Verify {
        spec: PathBuf,
        /// Points per axis, e.g. 5,5,5,5.
        #[arg(long, value_parser = parse_counts, default_value = "5,5,5,5")]
        grid: [usize; 4],
        /// Also write the report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print the normalized spec file and exit.
        #[arg(long)]
        dump_normalized: bool,
    },
    /// Seeded random trials of an identity.
    Fuzz {
        #[arg(value_enum)]
        check: FuzzArg,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deliberately break the checked identity (the run must then fail).
        #[arg(long)]
        mutate: bool,
    },
    /// Fit the spec's [unknowns] so that the vacuum residual vanishes.
    Solve {
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Collocation points per axis.
        #[arg(long, value_parser = parse_counts, default_value = "1,20,1,1")]
        collocation: [usize; 4],
    },
    /// Conserved current of a prolonged vector field and its divergence.
    Noether {
        spec: PathBuf,
        /// Translate along this coordinate (name or index).
        #[arg(long, conflicts_with = "field")]
        translate: Option<String>,
        /// Use the spec's [vectorfield] block.
        #[arg(long)]
        field: bool,
        #[arg(long, value_parser = parse_counts, default_value = "5,5,5,5")]
        grid: [usize; 4],
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FuzzArg {
    /// Density transformation law under gauge and chart changes.
    #[value(alias = "prop31")]
    DensityLaw,
    /// Bracket identities of the connection terms.
    #[value(alias = "prop32")]
    Bracket,
    Roundtrip,
    Contact,
}

impl From<FuzzArg> for FuzzCheck {
    fn from(a: FuzzArg) -> Self {
        match a {
            FuzzArg::DensityLaw => FuzzCheck::DensityLaw,
            FuzzArg::Bracket => FuzzCheck::Bracket,
            FuzzArg::Roundtrip => FuzzCheck::RoundTrip,
            FuzzArg::Contact => FuzzCheck::Contact,
        }
    }
}

fn parse_counts(s: &str) -> Result<[usize; 4], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d] if v.iter().all(|&n| n > 0) => Ok([*a, *b, *c, *d]),
        _ => Err("expected four positive counts, e.g. 5,5,5,5".into()),
    }
}

/// Caps the global work pool from `TF_THREADS`, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("TF_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

enum Failure {
    Input(String),
}

fn load(path: &PathBuf) -> Result<(SpecFile, Vec<u8>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec = SpecFile::parse(text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((spec, bytes))
}

fn coord_arg(spec: &SpecFile, s: &str) -> Result<usize, Failure> {
    spec.coords
        .iter()
        .position(|c| c == s)
        .or_else(|| s.parse::<usize>().ok().filter(|&k| k < 4))
        .ok_or_else(|| Failure::Input(format!("unknown coordinate `{s}`")))
}

/// Runs a parsed command, writing the report to `out` and diagnostics to
/// `err`. Returns the process exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let start = Instant::now();
    let result = (|| -> Result<Option<Report>, Failure> {
        Ok(Some(match &cli.command {
            Command::Verify { spec, grid, json, dump_normalized } => {
                let (s, bytes) = load(spec)?;
                if *dump_normalized {
                    let _ = write!(out, "{}", s.normalized());
                    return Ok(None);
                }
                let mut r = verify(&s, &bytes, *grid);
                if !cli.no_timing {
                    r.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                if let Some(p) = json {
                    std::fs::write(p, r.to_text()).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                }
                r
            }
            Command::Fuzz { check, trials, seed, mutate } => fuzz((*check).into(), *trials, *seed, *mutate),
            Command::Solve { spec, max_iter, collocation } => {
                let (s, bytes) = load(spec)?;
                let r = solve(&s, &bytes, *collocation, *max_iter);
                let _ = writeln!(err, "{:<12} {:>22}", "parameter", "value");
                for v in r.extra.iter().filter(|v| v["record"] == "parameter") {
                    let _ = writeln!(err, "{:<12} {:>22.12}", v["name"].as_str().unwrap_or(""), v["value"].as_f64().unwrap_or(f64::NAN));
                }
                r
            }
            Command::Noether { spec, translate, field, grid } => {
                let (s, bytes) = load(spec)?;
                let source = match (translate, field) {
                    (Some(c), _) => NoetherSource::Translate(coord_arg(&s, c)?),
                    (None, true) => NoetherSource::FromSpec,
                    (None, false) => return Err(Failure::Input("pass --translate <coord> or --field".into())),
                };
                noether(&s, &bytes, *grid, source)
            }
        }))
    })();
    match result {
        Ok(None) => 0,
        Ok(Some(mut r)) => {
            if cli.no_timing {
                r.elapsed_ms = None;
            } else if r.elapsed_ms.is_none() {
                r.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            if r.write_to(out).is_err() {
                return EXIT_INPUT;
            }
            for c in r.checks.iter().filter(|c| !c.status.ok()) {
                let _ = writeln!(err, "check {} failed: {}", c.check, c.detail.as_deref().unwrap_or("over tolerance"));
            }
            if r.ok() {
                0
            } else {
                EXIT_FAILED
            }
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

/// Entry point for the binary.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    configure_threads();
    let code = execute(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
