//! Fixed-point iteration with doubling inner solves (FP-SDA).
//!
//! Each outer step freezes Π at `X_k` and solves the correction equation
//! `(A_k − G_kX_k)ᵀZ + Z(A_k − G_kX_k) − Z G_k Z + R(X_k) = 0`
//! by doubling, then sets `X_{k+1} = X_k + Z`.

use alloc::boxed::Box;

use crate::care_sda::{select_shift, solve_care, SdaConfig, StopRule, MAX_DOUBLINGS};
use crate::error::{Error, Result};
use crate::matlib::{eigenvalues, Norm2Mode, SymMat};
use crate::report::{Method, SolveReport, Warning};
use crate::scare_model::{frozen, residual_and_nres, Problem};

/// Relative eigenvalue floor below which an iterate is reported as not PSD.
pub const NON_PSD_TOL: f64 = 1e-8;

/// Number of consecutive residual increases treated as divergence.
pub const DIVERGENCE_RUN: usize = 3;

#[derive(Clone, Debug)]
pub struct FpsdaConfig {
    pub eps: f64,
    pub tau: f64,
    pub max_outer: usize,
    pub norm2: Norm2Mode,
    pub x0: Option<SymMat>,
    pub max_doublings: usize,
    /// Fixed SDA shift for every outer step.
    pub gamma: Option<f64>,
    /// Keep the outer iterates in the report.
    pub record: bool,
}

impl Default for FpsdaConfig {
    fn default() -> Self {
        FpsdaConfig {
            eps: 1e-14,
            tau: 0.125,
            max_outer: 500,
            norm2: Norm2Mode::Auto,
            x0: None,
            max_doublings: MAX_DOUBLINGS,
            gamma: None,
            record: false,
        }
    }
}

/// Tracks consecutive increases of the normalized residual.
pub(crate) struct DivergenceGuard {
    start: f64,
    last: f64,
    run: usize,
}

impl DivergenceGuard {
    pub(crate) fn new(start: f64) -> Self {
        DivergenceGuard { start, last: start, run: 0 }
    }

    /// True once the residual has grown `DIVERGENCE_RUN` times in a row and
    /// sits above its starting value.
    pub(crate) fn push(&mut self, v: f64) -> bool {
        if v > self.last || !v.is_finite() {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.last = v;
        !v.is_finite() || (self.run >= DIVERGENCE_RUN && v > self.start)
    }
}

pub fn solve(p: &Problem, cfg: &FpsdaConfig) -> Result<SolveReport> {
    let n = p.n();
    let mut x = match &cfg.x0 {
        Some(x0) if x0.n() != n => {
            return Err(Error::DimensionMismatch("initial iterate has the wrong size".into()))
        }
        Some(x0) => x0.clone(),
        None => SymMat::zeros(n),
    };
    let (mut res, mut nr) = residual_and_nres(p, &x, cfg.norm2)?;
    let mut rep = SolveReport::new(Method::Fpsda, x.clone(), cfg.norm2);
    rep.nres_history.push(nr);
    if cfg.record {
        rep.iterates.push(x.clone());
    }
    let mut guard = DivergenceGuard::new(nr);
    let mut prev_gamma: Option<f64> = None;
    let mut k = 0;
    while nr > cfg.eps {
        if k >= cfg.max_outer {
            rep.x = x;
            return Err(Error::MaxIterationsExceeded(Some(Box::new(rep))));
        }
        let fz = frozen(p, &x)?;
        let ahat = fz.closed_loop(&x);
        let gamma = match cfg.gamma {
            Some(g) => g,
            None => match select_shift(&ahat, &fz.gc, &res) {
                Ok(sh) => {
                    if sh.degenerate {
                        rep.warnings.push(Warning::DegenerateShift { outer: k, gamma: sh.gamma });
                    }
                    sh.gamma
                }
                Err(e) => match prev_gamma {
                    Some(g) => {
                        rep.warnings.push(Warning::ShiftReused { outer: k, gamma: g });
                        g
                    }
                    None => return Err(Error::InnerBreakdown { outer: k, cause: Box::new(e) }),
                },
            },
        };
        let sda = SdaConfig {
            stop: StopRule::Relative(cfg.tau),
            max_doublings: cfg.max_doublings,
            gamma: Some(gamma),
            record: false,
        };
        let out = solve_care(&ahat, &fz.gc, &res, &sda)
            .map_err(|e| Error::InnerBreakdown { outer: k, cause: Box::new(e) })?;
        rep.warnings.extend(out.warnings.into_iter().map(|w| w.with_outer(k)));
        prev_gamma = Some(out.gamma);
        rep.inner.push(out.iterations);
        x = SymMat::symmetrize(&(x.as_mat() + out.x.as_mat()));
        let ev = x.eig()?.values;
        let top = ev.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        if ev[0] < -NON_PSD_TOL * top {
            rep.warnings.push(Warning::NonPsdIterate { outer: k + 1, min_eig: ev[0] });
        }
        let (r, v) = residual_and_nres(p, &x, cfg.norm2)?;
        res = r;
        nr = v;
        rep.nres_history.push(nr);
        if cfg.record {
            rep.iterates.push(x.clone());
        }
        k += 1;
        if guard.push(nr) {
            rep.x = x;
            return Err(Error::DivergenceDetected(Box::new(rep)));
        }
    }
    rep.closed_loop = eigenvalues(&frozen(p, &x)?.closed_loop(&x))?;
    rep.x = x;
    Ok(rep)
}

/// Runs FP-SDA only until the normalized residual drops below `delta`.
pub fn initial_for_newton(p: &Problem, delta: f64, cfg: &FpsdaConfig) -> Result<SolveReport> {
    let c = FpsdaConfig { eps: delta, ..cfg.clone() };
    solve(p, &c)
}
