use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scare_cli::compare::{compare, CompareRequest};
use scare_cli::export::{export, ExportRequest};
use scare_cli::run::{run, RunRequest};
use scare_cli::{exit, out_dir, CliError, Settings, Source};

/// Solvers for stochastic continuous-time algebraic Riccati equations.
///
/// Exit codes: 0 success, 2 invalid input, 3 no convergence, 4 internal error.
#[derive(Parser)]
#[command(name = "scare", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem with one method.
    Run(RunArgs),
    /// Run several methods on one problem and tabulate the counts.
    Compare(CompareArgs),
    /// Write the benchmark corpus and its manifest.
    Export(ExportArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Benchmark case id (ex5_1 .. ex5_8).
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    case: Option<String>,
    /// Problem JSON file.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Noise seed of a seeded case.
    #[arg(long, requires = "case")]
    seed: Option<u64>,
}

impl SourceArgs {
    fn source(self) -> Source {
        match (self.case, self.problem) {
            (Some(id), _) => Source::Case { id, seed: self.seed },
            (None, Some(p)) => Source::File(p),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Args)]
struct SettingsArgs {
    /// Target normalized residual.
    #[arg(long)]
    eps: Option<f64>,
    /// Inner tolerance factor.
    #[arg(long)]
    tau: Option<f64>,
    /// Residual at which Newton takes over from the warm start.
    #[arg(long)]
    delta: Option<f64>,
    /// Fixed negative shift.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Spectral norm evaluation: auto, exact or estimate.
    #[arg(long)]
    norm2: Option<String>,
}

impl From<SettingsArgs> for Settings {
    fn from(a: SettingsArgs) -> Settings {
        Settings { eps: a.eps, tau: a.tau, delta: a.delta, gamma: a.gamma, max_outer: a.max_outer, norm2: a.norm2 }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// fpsda, nt1, nt2, nt3, mnt, fp-gl or fp-sf1.
    #[arg(long)]
    method: String,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Output directory [default: $SCARE_OUT_DIR or ./scare-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall_ms null so reports are reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Also write the solution matrix.
    #[arg(long)]
    save_solution: bool,
    /// Report the relative error against this method's solution.
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated methods [default: all].
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, default_value = "fpsda")]
    reference: String,
    #[command(flatten)]
    settings: SettingsArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of concurrent solves.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every seeded case instead of the pinned one.
    #[arg(long)]
    seed: Option<u64>,
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run(a) => {
            let req = RunRequest {
                source: a.source.source(),
                method: a.method,
                settings: a.settings.into(),
                out: out_dir(a.out),
                timing: !a.no_timing,
                save_solution: a.save_solution,
                reference: a.reference,
            };
            let o = run(&req)?;
            println!("{}", o.history.display());
            println!("{}", o.report.display());
            if let Some(s) = o.solution {
                println!("{}", s.display());
            }
        }
        Cmd::Compare(a) => {
            let req = CompareRequest {
                source: a.source.source(),
                methods: a.methods,
                reference: a.reference,
                settings: a.settings.into(),
                out: out_dir(a.out),
                jobs: a.jobs,
            };
            let o = compare(&req)?;
            println!("{}", o.table.display());
        }
        Cmd::Export(a) => {
            for p in export(&ExportRequest { out: out_dir(a.out), seed: a.seed })? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let msg: Vec<&str> = text
                .lines()
                .map(|l| l.trim().trim_start_matches("error: "))
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            return fail(&CliError::validation("InvalidArgument", msg.join(" ")));
        }
    };
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli.cmd))) {
        Ok(Ok(())) => ExitCode::from(exit::OK as u8),
        Ok(Err(e)) => fail(&e),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(&CliError::internal("Internal", msg))
        }
    }
}
