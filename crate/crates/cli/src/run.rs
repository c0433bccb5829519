//! `scare run`: one method on one problem.

use std::path::{Path, PathBuf};
use std::time::Instant;

use scare_core::solver::{self, Options};
use scare_core::{solution_error, Method, Problem, SolveReport};
use serde_json::json;

use crate::report::{diagnostics, history_csv, RefError, RunReport};
use crate::{io, parse_method, CliError, Settings, Source};

pub struct RunRequest {
    pub source: Source,
    pub method: String,
    pub settings: Settings,
    pub out: PathBuf,
    /// Record wall-clock time; off makes reports byte-reproducible.
    pub timing: bool,
    pub save_solution: bool,
    pub reference: Option<String>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub history: PathBuf,
    pub report: PathBuf,
    pub solution: Option<PathBuf>,
}

pub fn timed_solve(p: &Problem, m: Method, opts: &Options, timing: bool) -> Result<SolveReport, scare_core::Error> {
    let t = Instant::now();
    let mut rep = solver::solve(p, m, opts)?;
    rep.wall_time = timing.then(|| t.elapsed());
    Ok(rep)
}

pub fn artifact(out: &Path, stem: &str, method: Method, what: &str) -> PathBuf {
    out.join(format!("{stem}_{}_{what}", method.name()))
}

/// Turns a solver error into a CLI error, saving whatever history exists.
pub fn solver_failure(e: scare_core::Error, m: Method, history_path: &Path) -> CliError {
    let diag = match e.partial_report() {
        Some(rep) => {
            let saved = io::write(history_path, &history_csv(rep)).is_ok();
            diagnostics(rep, saved.then(|| history_path.to_string_lossy()).as_deref())
        }
        None => json!({ "method": m.name(), "detail": e.to_string() }),
    };
    CliError::from(e).with_diagnostics(diag)
}

pub fn run(req: &RunRequest) -> Result<RunOutput, CliError> {
    let method = parse_method(&req.method)?;
    let reference = req.reference.as_deref().map(parse_method).transpose()?;
    let src = req.source.load()?;
    let opts = req.settings.options(src.case)?;

    let history = artifact(&req.out, &src.stem, method, "history.csv");
    let rep = timed_solve(&src.problem, method, &opts, req.timing)
        .map_err(|e| solver_failure(e, method, &history))?;

    let mut out = RunReport::new(&src, &opts, &rep);
    if let Some(rm) = reference {
        let value = if rm == method {
            solution_error(&rep.x, &rep.x)?
        } else {
            let rref = solver::solve(&src.problem, rm, &opts).map_err(|e| {
                let msg = format!("reference {}: {e}", rm.name());
                CliError { message: msg, ..CliError::from(e) }
            })?;
            solution_error(&rep.x, &rref.x)?
        };
        out.solution_error_vs_reference = Some(RefError { method: rm.name(), value });
    }

    io::write(&history, &history_csv(&rep))?;
    let report = artifact(&req.out, &src.stem, method, "report.json");
    io::write(&report, io::to_json(&out).as_bytes())?;
    let solution = if req.save_solution {
        let path = artifact(&req.out, &src.stem, method, "solution.json");
        io::write(&path, io::solution_json(&rep.x).as_bytes())?;
        Some(path)
    } else {
        None
    };
    Ok(RunOutput { history, report, solution })
}
