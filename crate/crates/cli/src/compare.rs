//! `scare compare`: several methods on one problem, tabulated.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use scare_core::solver::Options;
use scare_core::{solution_error, Method, Problem, SolveReport};

use crate::run::timed_solve;
use crate::{io, parse_method, CliError, Settings, Source};

pub const COLUMNS: [&str; 10] =
    ["method", "outer", "inner", "innermost", "solution_error", "delta", "init_outer", "init_inner", "final_nres", "status"];

pub struct CompareRequest {
    pub source: Source,
    /// Empty means every method.
    pub methods: Vec<String>,
    pub reference: String,
    pub settings: Settings,
    pub out: PathBuf,
    pub jobs: usize,
}

#[derive(Debug)]
pub struct CompareOutput {
    pub table: PathBuf,
    /// Methods whose cells carry an error marker.
    pub failed: Vec<&'static str>,
}

type Outcome = Result<SolveReport, scare_core::Error>;

fn solve_all(p: &Problem, methods: &[Method], opts: &Options, jobs: usize) -> Vec<Outcome> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Outcome>>> = methods.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, methods.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&m) = methods.get(i) else { break };
                let r = timed_solve(p, m, opts, false);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().expect("every slot is filled")).collect()
}

pub fn compare(req: &CompareRequest) -> Result<CompareOutput, CliError> {
    let mut methods = Vec::new();
    for s in &req.methods {
        let m = parse_method(s)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        methods = Method::ALL.to_vec();
    }
    let reference = parse_method(&req.reference)?;
    let src = req.source.load()?;
    let opts = req.settings.options(src.case)?;

    let mut todo = methods.clone();
    if !todo.contains(&reference) {
        todo.push(reference);
    }
    let results = solve_all(&src.problem, &todo, &opts, req.jobs);
    let xref = results[todo.iter().position(|&m| m == reference).unwrap()].as_ref().map(|r| &r.x);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    let mut failed = Vec::new();
    for (m, res) in methods.iter().zip(&results) {
        let row = match res {
            Ok(rep) => {
                let c = rep.counts();
                let err = match xref {
                    Ok(x) => match solution_error(&rep.x, x) {
                        Ok(v) => format!("{v:e}"),
                        Err(e) => marker(&e),
                    },
                    Err(e) => marker(e),
                };
                let (delta, io_, ii) = if m.is_newton() {
                    (opts.delta.to_string(), c.init_outer.to_string(), c.init_inner.to_string())
                } else {
                    (String::new(), String::new(), String::new())
                };
                vec![
                    m.name().to_string(),
                    c.outer.to_string(),
                    c.inner.to_string(),
                    c.innermost.to_string(),
                    err,
                    delta,
                    io_,
                    ii,
                    format!("{:e}", rep.final_nres()),
                    "ok".to_string(),
                ]
            }
            Err(e) => {
                failed.push(m.name());
                let k = marker(e);
                let mut row = vec![m.name().to_string()];
                row.extend(std::iter::repeat_n(k, COLUMNS.len() - 2));
                row.push(e.kind().to_string());
                row
            }
        };
        w.write_record(&row).expect("in-memory write");
    }
    let table = req.out.join(format!("{}_compare.csv", src.stem));
    io::write(&table, &w.into_inner().expect("in-memory write"))?;
    Ok(CompareOutput { table, failed })
}

fn marker(e: &scare_core::Error) -> String {
    format!("ERR:{}", e.kind())
}
