//! Problem and solution files.
//!
//! A problem file is a JSON object `{n, m, r, A, B, Q, L, R, A0, B0}` with
//! every matrix stored as row-major nested arrays.

use std::fs;
use std::path::Path;

use scare_core::{Mat, Problem, SymMat};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

type Rows = Vec<Vec<f64>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "Q")]
    pub q: Rows,
    #[serde(rename = "L")]
    pub l: Rows,
    #[serde(rename = "R")]
    pub r_mat: Rows,
    #[serde(rename = "A0")]
    pub a0: Vec<Rows>,
    #[serde(rename = "B0")]
    pub b0: Vec<Rows>,
}

#[derive(Serialize, Deserialize)]
pub struct SolutionFile {
    pub n: usize,
    #[serde(rename = "X")]
    pub x: Rows,
}

impl ProblemFile {
    pub fn from_problem(p: &Problem) -> ProblemFile {
        ProblemFile {
            n: p.n(),
            m: p.m(),
            r: p.noise_terms(),
            a: p.a().to_rows(),
            b: p.b().to_rows(),
            q: p.q().as_mat().to_rows(),
            l: p.l().to_rows(),
            r_mat: p.r().as_mat().to_rows(),
            a0: p.a0().iter().map(Mat::to_rows).collect(),
            b0: p.b0().iter().map(Mat::to_rows).collect(),
        }
    }

    pub fn into_problem(self) -> Result<Problem, CliError> {
        let (n, m, r) = (self.n, self.m, self.r);
        if self.a0.len() != r || self.b0.len() != r {
            return Err(CliError::validation(
                "DimensionMismatch",
                format!("r = {} but {} A0 and {} B0 matrices given", r, self.a0.len(), self.b0.len()),
            ));
        }
        let a = matrix("A", &self.a, n, n)?;
        let b = matrix("B", &self.b, n, m)?;
        let q = matrix("Q", &self.q, n, n)?;
        let l = matrix("L", &self.l, n, m)?;
        let rm = matrix("R", &self.r_mat, m, m)?;
        let a0 = self.a0.iter().enumerate().map(|(i, v)| matrix(&format!("A0[{i}]"), v, n, n)).collect::<Result<_, _>>()?;
        let b0 = self.b0.iter().enumerate().map(|(i, v)| matrix(&format!("B0[{i}]"), v, n, m)).collect::<Result<_, _>>()?;
        Ok(Problem::new(a, b, q, l, rm, a0, b0)?)
    }
}

fn matrix(name: &str, rows: &Rows, nr: usize, nc: usize) -> Result<Mat, CliError> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        return Err(CliError::validation("DimensionMismatch", format!("{name} must be {nr}x{nc}")));
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    if nr == 0 {
        return Ok(Mat::zeros(0, nc));
    }
    Ok(Mat::from_rows(&refs)?)
}

pub fn read_problem(path: &Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation("Io", format!("{}: {e}", path.display())))?;
    let f: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::validation("ParseError", format!("{}: {e}", path.display())))?;
    f.into_problem()
}

pub fn solution_json(x: &SymMat) -> String {
    to_json(&SolutionFile { n: x.n(), x: x.as_mat().to_rows() })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::internal("Io", format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::internal("Io", format!("{}: {e}", path.display())))
}
