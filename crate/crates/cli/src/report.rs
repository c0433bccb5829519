//! Serialized forms of solver output. Field order is the key order.

use serde::Serialize;
use serde_json::{json, Value};

use scare_core::solver::Options;
use scare_core::SolveReport;

use crate::{norm2_name, Loaded};

#[derive(Serialize)]
pub struct SettingsOut {
    pub eps: f64,
    pub tau: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    pub max_outer: Option<usize>,
    pub norm2: &'static str,
    pub seed: Option<u64>,
}

impl SettingsOut {
    pub fn new(o: &Options, seed: Option<u64>) -> SettingsOut {
        SettingsOut {
            eps: o.eps,
            tau: o.tau,
            delta: o.delta,
            gamma: o.gamma,
            max_outer: o.max_outer,
            norm2: norm2_name(o.norm2),
            seed,
        }
    }
}

#[derive(Serialize)]
pub struct CountsOut {
    pub outer: usize,
    pub inner: usize,
    pub innermost: usize,
    pub init_outer: usize,
    pub init_inner: usize,
}

#[derive(Serialize)]
pub struct RefError {
    pub method: &'static str,
    pub value: f64,
}

#[derive(Serialize)]
pub struct RunReport {
    pub method: &'static str,
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub settings: SettingsOut,
    pub counts: CountsOut,
    pub final_nres: f64,
    pub solution_error_vs_reference: Option<RefError>,
    pub wall_ms: Option<u64>,
    pub warnings: Vec<String>,
    pub closed_loop_real_parts: Vec<f64>,
}

impl RunReport {
    pub fn new(src: &Loaded, opts: &Options, rep: &SolveReport) -> RunReport {
        let c = rep.counts();
        let p = &src.problem;
        RunReport {
            method: rep.method.name(),
            problem: src.stem.clone(),
            n: p.n(),
            m: p.m(),
            r: p.noise_terms(),
            settings: SettingsOut::new(opts, src.seed),
            counts: CountsOut {
                outer: c.outer,
                inner: c.inner,
                innermost: c.innermost,
                init_outer: c.init_outer,
                init_inner: c.init_inner,
            },
            final_nres: rep.final_nres(),
            solution_error_vs_reference: None,
            wall_ms: rep.wall_time.map(|d| d.as_millis() as u64),
            warnings: rep.warnings.iter().map(|w| w.to_string()).collect(),
            closed_loop_real_parts: rep.closed_loop.iter().map(|z| z.re).collect(),
        }
    }
}

/// History rows: the warm start first for Newton runs.
pub fn history_csv(rep: &SolveReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iter", "nres"]).expect("in-memory write");
    for (i, v) in rep.combined_history().iter().enumerate() {
        w.serialize((i, v)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Failure details attached to the stderr error object.
pub fn diagnostics(rep: &SolveReport, history: Option<&str>) -> Value {
    let h = rep.combined_history();
    let best = h.iter().copied().fold(f64::INFINITY, f64::min);
    let tail: Vec<f64> = h.iter().rev().take(5).rev().copied().collect();
    json!({
        "method": rep.method.name(),
        "outer": rep.outer(),
        "final_nres": rep.final_nres(),
        "best_nres": best,
        "nres_tail": tail,
        "warnings": rep.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "history": history,
    })
}
