use alloc::boxed::Box;
use alloc::string::String;

use crate::report::SolveReport;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("singular matrix ({0})")]
    Singular(&'static str),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("R + Pi22(X) is singular")]
    SingularRc,
    #[error("Hamiltonian has no eigenvalues in the open left half plane")]
    NoStableEigenvalues,
    #[error("shifted matrix A + gamma I is singular")]
    SingularShiftedMatrix,
    #[error("doubling breakdown at step {step}: I - Y X is singular")]
    DoublingBreakdown { step: usize },
    #[error("iteration limit reached without convergence")]
    MaxIterationsExceeded(Option<Box<SolveReport>>),
    #[error("inner solve failed at outer step {outer}: {cause}")]
    InnerBreakdown { outer: usize, cause: Box<Error> },
    #[error("Newton Kronecker system is singular")]
    SingularNewtonSystem,
    #[error("n = {n} exceeds the Kronecker limit {limit}")]
    ProblemTooLargeForDirect { n: usize, limit: usize },
    #[error("closed-loop matrix is not stable at outer step {outer}")]
    UnstableAhat { outer: usize },
    #[error("normalized residual increased on consecutive steps")]
    DivergenceDetected(Box<SolveReport>),
    #[error("inner fixed-point matrix is singular")]
    SingularInnerMatrix,
    #[error("reference solution has zero norm")]
    ZeroReference,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotSymmetric => "NotSymmetric",
            Error::Singular(_) => "SingularMatrix",
            Error::InvalidProblem(_) => "InvalidProblem",
            Error::SingularRc => "SingularRc",
            Error::NoStableEigenvalues => "NoStableEigenvalues",
            Error::SingularShiftedMatrix => "SingularShiftedMatrix",
            Error::DoublingBreakdown { .. } => "DoublingBreakdown",
            Error::MaxIterationsExceeded(_) => "MaxIterationsExceeded",
            Error::InnerBreakdown { .. } => "InnerBreakdown",
            Error::SingularNewtonSystem => "SingularNewtonSystem",
            Error::ProblemTooLargeForDirect { .. } => "ProblemTooLargeForDirect",
            Error::UnstableAhat { .. } => "UnstableAhat",
            Error::DivergenceDetected(_) => "DivergenceDetected",
            Error::SingularInnerMatrix => "SingularInnerMatrix",
            Error::ZeroReference => "ZeroReference",
            Error::NoConvergence(_) => "NoConvergence",
        }
    }

    /// True when a solver failed on valid input: iteration limits,
    /// divergence, or a breakdown of the iteration itself.
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::MaxIterationsExceeded(_)
            | Error::DivergenceDetected(_)
            | Error::UnstableAhat { .. }
            | Error::NoStableEigenvalues
            | Error::DoublingBreakdown { .. }
            | Error::SingularRc
            | Error::SingularShiftedMatrix
            | Error::SingularNewtonSystem
            | Error::SingularInnerMatrix => true,
            Error::InnerBreakdown { cause, .. } => cause.is_non_convergence(),
            _ => false,
        }
    }

    /// True for input validation failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::NonFinite
                | Error::NotSymmetric
                | Error::InvalidProblem(_)
                | Error::ProblemTooLargeForDirect { .. }
        )
    }

    /// Partial report carried by non-convergence errors.
    pub fn partial_report(&self) -> Option<&SolveReport> {
        match self {
            Error::MaxIterationsExceeded(Some(r)) | Error::DivergenceDetected(r) => Some(r),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
