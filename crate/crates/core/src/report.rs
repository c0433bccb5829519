//! Solver output shared by every method.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::matlib::{Norm2Mode, SymMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Fpsda,
    Nt1,
    Nt2,
    Nt3,
    Mnt,
    FpGl,
    FpSf1,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Fpsda,
        Method::Nt1,
        Method::Nt2,
        Method::Nt3,
        Method::Mnt,
        Method::FpGl,
        Method::FpSf1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fpsda => "fpsda",
            Method::Nt1 => "nt1",
            Method::Nt2 => "nt2",
            Method::Nt3 => "nt3",
            Method::Mnt => "mnt",
            Method::FpGl => "fp-gl",
            Method::FpSf1 => "fp-sf1",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.iter().copied().find(|m| m.name() == s)
    }

    pub fn is_newton(self) -> bool {
        matches!(self, Method::Nt1 | Method::Nt2 | Method::Nt3 | Method::Mnt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// Left-half-plane eigenvalues too close to the axis; a small fixed
    /// shift was used instead of the rectangle rule.
    DegenerateShift { outer: usize, gamma: f64 },
    /// `A + γI` was badly conditioned and γ was enlarged.
    ShiftPerturbed { outer: usize, gamma: f64 },
    /// Shift selection failed; the previous shift was reused.
    ShiftReused { outer: usize, gamma: f64 },
    /// The inner Newton loop hit its iteration cap.
    InnerCapReached { outer: usize, iterations: usize },
    /// The inner Newton loop stalled at rounding level.
    InnerStalled { outer: usize, iterations: usize },
    /// An outer iterate has a clearly negative eigenvalue.
    NonPsdIterate { outer: usize, min_eig: f64 },
    /// The residual stopped improving before reaching its target; the best
    /// iterate was returned.
    Stagnated { outer: usize, nres: f64 },
}

impl Warning {
    pub fn with_outer(self, k: usize) -> Warning {
        match self {
            Warning::DegenerateShift { gamma, .. } => Warning::DegenerateShift { outer: k, gamma },
            Warning::ShiftPerturbed { gamma, .. } => Warning::ShiftPerturbed { outer: k, gamma },
            Warning::ShiftReused { gamma, .. } => Warning::ShiftReused { outer: k, gamma },
            Warning::InnerCapReached { iterations, .. } => {
                Warning::InnerCapReached { outer: k, iterations }
            }
            Warning::InnerStalled { iterations, .. } => Warning::InnerStalled { outer: k, iterations },
            Warning::Stagnated { nres, .. } => Warning::Stagnated { outer: k, nres },
            Warning::NonPsdIterate { min_eig, .. } => Warning::NonPsdIterate { outer: k, min_eig },
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateShift { outer, gamma } => {
                write!(f, "step {}: degenerate spectrum, fallback shift {:e}", outer, gamma)
            }
            Warning::ShiftPerturbed { outer, gamma } => {
                write!(f, "step {}: ill-conditioned shift, perturbed to {:e}", outer, gamma)
            }
            Warning::ShiftReused { outer, gamma } => {
                write!(f, "step {}: shift selection failed, reused {:e}", outer, gamma)
            }
            Warning::InnerCapReached { outer, iterations } => {
                write!(f, "step {}: inner loop stopped at cap {}", outer, iterations)
            }
            Warning::InnerStalled { outer, iterations } => {
                write!(f, "step {}: inner loop stalled after {} iterations", outer, iterations)
            }
            Warning::NonPsdIterate { outer, min_eig } => {
                write!(f, "step {}: iterate has eigenvalue {:e}", outer, min_eig)
            }
            Warning::Stagnated { outer, nres } => {
                write!(f, "step {}: iterates stagnated at normalized residual {:e}", outer, nres)
            }
        }
    }
}

/// Iteration counts in the layout of the comparison tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub outer: usize,
    pub inner: usize,
    pub innermost: usize,
    pub init_outer: usize,
    pub init_inner: usize,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub x: SymMat,
    /// Normalized residual at `X_0, X_1, …`.
    pub nres_history: Vec<f64>,
    /// Inner work per outer step: SDA iterates for FP-SDA, Lyapunov solves
    /// for the Newton variants.
    pub inner: Vec<usize>,
    /// Smith iterations per outer step, when the inner solver is Smith.
    pub innermost: Vec<usize>,
    /// FP-SDA run that produced the Newton starting point.
    pub warm_start: Option<Box<SolveReport>>,
    pub warnings: Vec<Warning>,
    /// Eigenvalues of `A_c(X) - G_c(X) X` at the returned iterate.
    pub closed_loop: Vec<C64>,
    pub norm2: Norm2Mode,
    /// Outer iterates `X_0, X_1, …` when recording was requested.
    pub iterates: Vec<SymMat>,
    /// Filled in by callers that can measure time.
    pub wall_time: Option<Duration>,
}

impl SolveReport {
    pub fn new(method: Method, x: SymMat, norm2: Norm2Mode) -> SolveReport {
        SolveReport {
            method,
            x,
            nres_history: Vec::new(),
            inner: Vec::new(),
            innermost: Vec::new(),
            warm_start: None,
            warnings: Vec::new(),
            closed_loop: Vec::new(),
            norm2,
            iterates: Vec::new(),
            wall_time: None,
        }
    }

    pub fn outer(&self) -> usize {
        self.nres_history.len().saturating_sub(1)
    }

    pub fn final_nres(&self) -> f64 {
        self.nres_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn counts(&self) -> Counts {
        let (init_outer, init_inner) = match &self.warm_start {
            Some(w) => (w.outer(), w.inner.iter().sum()),
            None => (0, 0),
        };
        Counts {
            outer: self.outer(),
            inner: self.inner.iter().sum(),
            innermost: self.innermost.iter().sum(),
            init_outer,
            init_inner,
        }
    }

    /// Warm-start history followed by this run's history, without repeating
    /// the shared starting point.
    pub fn combined_history(&self) -> Vec<f64> {
        let mut h = Vec::new();
        if let Some(w) = &self.warm_start {
            h.extend_from_slice(&w.nres_history);
            h.extend(self.nres_history.iter().skip(1));
        } else {
            h.extend_from_slice(&self.nres_history);
        }
        h
    }
}

/// `‖X − X_ref‖_F / ‖X_ref‖_F`.
pub fn solution_error(x: &SymMat, xref: &SymMat) -> crate::error::Result<f64> {
    if x.n() != xref.n() {
        return Err(crate::error::Error::DimensionMismatch("solution sizes differ".into()));
    }
    let d = xref.norm_fro();
    if d == 0.0 {
        return Err(crate::error::Error::ZeroReference);
    }
    Ok((x.as_mat() - xref.as_mat()).norm_fro() / d)
}
