//! Command-line runner for the SCARE solvers.
//!
//! `scare run` solves one problem with one method and writes a residual
//! history (`iter,nres` CSV) and a JSON report. `scare compare` runs several
//! methods on one problem and tabulates iteration counts and relative
//! solution errors. `scare export` writes the benchmark corpus.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
//! 4 internal error. Failures print one JSON object on stderr.

pub mod compare;
pub mod error;
pub mod export;
pub mod io;
pub mod report;
pub mod run;

use std::path::PathBuf;

use scare_core::benchmarks::{self, Case};
use scare_core::matlib::Norm2Mode;
use scare_core::solver::Options;
use scare_core::{Method, Problem};

pub use error::{exit, CliError};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "SCARE_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "scare-out";

/// `--out` if given, else `$SCARE_OUT_DIR`, else `./scare-out`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Clone, Debug)]
pub enum Source {
    Case { id: String, seed: Option<u64> },
    File(PathBuf),
}

pub struct Loaded {
    /// Prefix of every artifact name.
    pub stem: String,
    pub problem: Problem,
    pub case: Option<Case>,
    pub seed: Option<u64>,
}

impl Source {
    pub fn load(&self) -> Result<Loaded, CliError> {
        match self {
            Source::Case { id, seed } => {
                let case = Case::parse(id).ok_or_else(|| {
                    let known: Vec<&str> = Case::ALL.iter().map(|c| c.name()).collect();
                    CliError::validation("UnknownCase", format!("unknown case '{id}', expected one of {}", known.join(", ")))
                })?;
                if seed.is_some() && !case.is_seeded() {
                    return Err(CliError::validation("InvalidArgument", format!("{id} takes no seed")));
                }
                let seed = case.is_seeded().then(|| seed.unwrap_or(case.default_seed()));
                let problem = benchmarks::build_seeded(case, seed.unwrap_or(0));
                let stem = match seed {
                    Some(s) if s != case.default_seed() => format!("{}_s{s}", case.name()),
                    _ => case.name().to_string(),
                };
                Ok(Loaded { stem, problem, case: Some(case), seed })
            }
            Source::File(path) => {
                let problem = io::read_problem(path)?;
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into());
                Ok(Loaded { stem, problem, case: None, seed: None })
            }
        }
    }
}

/// Solver settings given on the command line; unset fields keep defaults.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub max_outer: Option<usize>,
    pub norm2: Option<String>,
}

impl Settings {
    pub fn options(&self, case: Option<Case>) -> Result<Options, CliError> {
        let d = Options::default();
        let norm2 = match self.norm2.as_deref() {
            None => d.norm2,
            Some(s) => parse_norm2(s)?,
        };
        let opts = Options {
            eps: self.eps.unwrap_or(d.eps),
            tau: self.tau.unwrap_or(d.tau),
            delta: self.delta.or(case.map(Case::default_delta)).unwrap_or(d.delta),
            gamma: self.gamma,
            max_outer: self.max_outer,
            norm2,
            ..d
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::validation("InvalidArgument", format!("{name} must be positive, got {v}")))
            }
        };
        positive("eps", opts.eps)?;
        positive("tau", opts.tau)?;
        positive("delta", opts.delta)?;
        if let Some(g) = opts.gamma {
            if !(g < 0.0) {
                return Err(CliError::validation("InvalidArgument", format!("gamma must be negative, got {g}")));
            }
        }
        Ok(opts)
    }
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    Method::parse(s).ok_or_else(|| {
        let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        CliError::validation("UnknownMethod", format!("unknown method '{s}', expected one of {}", known.join(", ")))
    })
}

pub fn parse_norm2(s: &str) -> Result<Norm2Mode, CliError> {
    match s {
        "auto" => Ok(Norm2Mode::Auto),
        "exact" => Ok(Norm2Mode::Exact),
        "estimate" => Ok(Norm2Mode::Estimate),
        _ => Err(CliError::validation("InvalidArgument", format!("norm2 must be auto, exact or estimate, got '{s}'"))),
    }
}

pub fn norm2_name(m: Norm2Mode) -> &'static str {
    match m {
        Norm2Mode::Auto => "auto",
        Norm2Mode::Exact => "exact",
        Norm2Mode::Estimate => "estimate",
    }
}
