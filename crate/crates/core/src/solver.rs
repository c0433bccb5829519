//! One entry point for every method.

use crate::error::Result;
use crate::fixed_point::{self, FixedPointConfig, FixedPointOp};
use crate::fpsda::{self, FpsdaConfig};
use crate::matlib::{Norm2Mode, SymMat};
use crate::newton::{self, NewtonConfig};
use crate::report::{Method, SolveReport};
use crate::scare_model::Problem;

/// Settings shared by all methods. `None` keeps the method's default.
#[derive(Clone, Debug)]
pub struct Options {
    pub eps: f64,
    pub tau: f64,
    /// Warm-start threshold of the Newton variants.
    pub delta: f64,
    /// Fixed shift for FP-SDA's inner solves and for the fixed-point maps.
    pub gamma: Option<f64>,
    pub max_outer: Option<usize>,
    pub norm2: Norm2Mode,
    pub x0: Option<SymMat>,
    pub record: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            eps: 1e-14,
            tau: 0.125,
            delta: 0.5,
            gamma: None,
            max_outer: None,
            norm2: Norm2Mode::Auto,
            x0: None,
            record: false,
        }
    }
}

impl Options {
    pub fn fpsda(&self) -> FpsdaConfig {
        let d = FpsdaConfig::default();
        FpsdaConfig {
            eps: self.eps,
            tau: self.tau,
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            norm2: self.norm2,
            x0: self.x0.clone(),
            gamma: self.gamma,
            record: self.record,
            ..d
        }
    }

    pub fn newton(&self) -> NewtonConfig {
        let d = NewtonConfig::default();
        NewtonConfig {
            eps: self.eps,
            delta: self.delta,
            tau: self.tau,
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            norm2: self.norm2,
            x0: self.x0.clone(),
            warm: FpsdaConfig { tau: self.tau, gamma: self.gamma, ..d.warm.clone() },
            record: self.record,
            ..d
        }
    }

    pub fn fixed_point(&self) -> FixedPointConfig {
        let d = FixedPointConfig::default();
        FixedPointConfig {
            eps: self.eps,
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            norm2: self.norm2,
            gamma: self.gamma,
            x0: self.x0.clone(),
            record: self.record,
            ..d
        }
    }
}

pub fn solve(p: &Problem, method: Method, opts: &Options) -> Result<SolveReport> {
    match method {
        Method::Fpsda => fpsda::solve(p, &opts.fpsda()),
        Method::FpGl => fixed_point::solve(p, FixedPointOp::GuoLiang, &opts.fixed_point()),
        Method::FpSf1 => fixed_point::solve(p, FixedPointOp::Sf1, &opts.fixed_point()),
        _ => newton::solve(p, method, &opts.newton()),
    }
}
