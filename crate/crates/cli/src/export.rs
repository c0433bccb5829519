//! `scare export`: the benchmark corpus as problem files plus a manifest.

use std::path::PathBuf;

use scare_core::benchmarks::{self, Case};
use scare_core::Problem;
use serde::Serialize;

use crate::io::{self, ProblemFile};
use crate::CliError;

#[derive(Serialize)]
pub struct Noise {
    pub coeff: f64,
    pub power_step: u64,
}

#[derive(Serialize)]
pub struct Reference {
    pub fpsda: (usize, usize),
    pub nt1: usize,
    pub nt2: (usize, usize),
    pub nt3: (usize, usize, usize),
    pub init: (usize, usize),
}

#[derive(Serialize)]
pub struct Entry {
    pub id: &'static str,
    pub file: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub seeded: bool,
    pub seed: Option<u64>,
    pub noise_a0: Option<Noise>,
    pub noise_b0: Option<Noise>,
    pub delta: f64,
    /// Reference iteration counts, where the data is deterministic.
    pub reference_counts: Option<Reference>,
}

#[derive(Serialize)]
pub struct Manifest {
    pub cases: Vec<Entry>,
}

pub struct ExportRequest {
    pub out: PathBuf,
    /// Replaces the pinned seed of every seeded case.
    pub seed: Option<u64>,
}

pub fn entry(case: Case, seed: Option<u64>, p: &Problem) -> Entry {
    let noise = case.noise();
    Entry {
        id: case.name(),
        file: format!("{}.json", case.name()),
        n: p.n(),
        m: p.m(),
        r: p.noise_terms(),
        seeded: case.is_seeded(),
        seed,
        noise_a0: noise.map(|(a, _)| Noise { coeff: a.coeff, power_step: a.power_step }),
        noise_b0: noise.map(|(_, b)| Noise { coeff: b.coeff, power_step: b.power_step }),
        delta: case.default_delta(),
        reference_counts: case.reference().map(|r| Reference {
            fpsda: r.fpsda,
            nt1: r.nt1,
            nt2: r.nt2,
            nt3: r.nt3,
            init: r.init,
        }),
    }
}

/// Writes `<id>.json` for every case and `manifest.json`; returns the paths.
pub fn export(req: &ExportRequest) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let mut cases = Vec::new();
    for case in Case::ALL {
        let seed = case.is_seeded().then(|| req.seed.unwrap_or(case.default_seed()));
        let p = benchmarks::build_seeded(case, seed.unwrap_or(0));
        let path = req.out.join(format!("{}.json", case.name()));
        io::write(&path, io::to_json(&ProblemFile::from_problem(&p)).as_bytes())?;
        written.push(path);
        cases.push(entry(case, seed, &p));
    }
    let path = req.out.join("manifest.json");
    io::write(&path, io::to_json(&Manifest { cases }).as_bytes())?;
    written.push(path);
    Ok(written)
}
