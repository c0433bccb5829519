//! Fixed-point and Newton solvers for the stochastic continuous-time
//! algebraic Riccati equation
//!
//! ```text
//! AᵀX + XA + Q + Π₁₁(X) − [XB + L + Π₁₂(X)][R + Π₂₂(X)]⁻¹[XB + L + Π₁₂(X)]ᵀ = 0
//! ```
//!
//! with `Π` built from the multiplicative noise matrices `A0ᵢ`, `B0ᵢ`.
//!
//! ```
//! use scare_core::{benchmarks, solver, Method};
//!
//! let p = benchmarks::scalar(-1.0, 1.0, 1.0);
//! let rep = solver::solve(&p, Method::Fpsda, &Default::default()).unwrap();
//! assert!((rep.x[(0, 0)] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
//! ```
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod benchmarks;
pub mod care_sda;
pub mod error;
pub mod fixed_point;
pub mod fpsda;
pub mod matlib;
pub mod newton;
pub mod report;
pub mod scare_model;
pub mod solver;

pub use error::{Error, Result};
pub use matlib::{Mat, Norm2Mode, SymMat};
pub use report::{solution_error, Counts, Method, SolveReport, Warning};
pub use scare_model::Problem;
