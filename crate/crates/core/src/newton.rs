//! Newton's method for the stochastic Riccati equation.
//!
//! At `X_k` the Newton step solves the generalized Lyapunov equation
//! `ÂᵀX + XÂ + Π̂(X) + M = 0` where, with `K = R_k⁻¹ S_kᵀ`,
//! `Â = A − BK`, `Π̂(X) = Σ (A0ᵢ − B0ᵢK)ᵀ X (A0ᵢ − B0ᵢK)` and
//! `M = Q − LK − KᵀLᵀ + KᵀRK`.
//!
//! * NT1 solves it through its Kronecker matrix.
//! * NT2 and NT3 iterate on `ÂᵀY + YÂ + Π̂(Y_j) + M = 0` with a direct or a
//!   Smith inner Lyapunov solver.
//! * The modified method takes a single inner Lyapunov solve per step.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::care_sda::{lyapunov_shift, solve_lyapunov_smith, SdaConfig, StopRule, MAX_DOUBLINGS};
use crate::error::{Error, Result};
use crate::fpsda::{self, DivergenceGuard, FpsdaConfig};
use crate::matlib::{complex_schur, eigenvalues, kron, unvec, vec_of, Lu, Mat, Norm2Mode, SymMat, C64};
use crate::report::{Method, SolveReport, Warning};
use crate::scare_model::{frozen, pi, residual_and_nres, s_of, Problem};

/// Largest `n` accepted by NT1 (its system has `n²` unknowns).
pub const N_KRON_MAX: usize = 64;
/// Largest `n` for which the direct Lyapunov solver uses the Kronecker form.
pub const KRON_LYAP_MAX: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LyapSolver {
    Direct,
    Smith,
}

#[derive(Clone, Debug)]
pub struct NewtonConfig {
    pub eps: f64,
    /// FP-SDA warm start runs until the normalized residual is below this.
    pub delta: f64,
    /// Relative tolerance of Smith inner solves.
    pub tau: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub n_kron_max: usize,
    pub norm2: Norm2Mode,
    /// Starting point; skips the warm start when given.
    pub x0: Option<SymMat>,
    /// Inner solver of the modified method.
    pub mnt_inner: LyapSolver,
    pub warm: FpsdaConfig,
    pub record: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            eps: 1e-14,
            delta: 0.5,
            tau: 0.125,
            max_outer: 100,
            max_inner: 100,
            n_kron_max: N_KRON_MAX,
            norm2: Norm2Mode::Auto,
            x0: None,
            mnt_inner: LyapSolver::Smith,
            warm: FpsdaConfig::default(),
            record: false,
        }
    }
}

/// Newton step data at one iterate.
#[derive(Clone, Debug)]
pub struct NewtonAssembly {
    /// `S_k = X_kB + L + Π₁₂(X_k)`.
    pub s: Mat,
    /// `R_k = R + Π₂₂(X_k)`.
    pub rk: SymMat,
    /// `T_k = S_k R_k⁻¹`.
    pub t: Mat,
    /// `Â_k = A − B R_k⁻¹ S_kᵀ`.
    pub ahat: Mat,
    /// `P_k = [I; −R_k⁻¹ S_kᵀ]`.
    pub p: Mat,
    /// `M_k = P_kᵀ [[Q, L], [Lᵀ, R]] P_k`.
    pub m: SymMat,
    /// `A0ᵢ − B0ᵢ T_kᵀ`.
    pub closed_noise: Vec<Mat>,
}

pub fn assemble(p: &Problem, x: &SymMat) -> Result<NewtonAssembly> {
    let pi = pi(p, x)?;
    let s = s_of(p, x, &pi);
    let rk = SymMat::symmetrize(&(p.r().as_mat() + pi.p22.as_mat()));
    let lu = Lu::new(&rk).map_err(|_| Error::SingularRc)?;
    let k = lu.solve(&s.transpose())?;
    let t = k.transpose();
    let ahat = p.a() - &(p.b() * &k);
    let n = p.n();
    let mut pm = Mat::zeros(n + p.m(), n);
    pm.set_block(0, 0, &Mat::identity(n));
    pm.set_block(n, 0, &-&k);
    let lk = p.l() * &k;
    let mm = &(&(p.q().as_mat() - &lk) - &lk.transpose()) + &k.tr_mul(&(p.r().as_mat() * &k));
    let closed_noise = p.a0().iter().zip(p.b0()).map(|(a0, b0)| a0 - &(b0 * &k)).collect();
    Ok(NewtonAssembly { s, rk, t, ahat, p: pm, m: SymMat::symmetrize(&mm), closed_noise })
}

impl NewtonAssembly {
    pub fn n(&self) -> usize {
        self.ahat.rows()
    }

    /// `Π̂(Y) = Σ Nᵢᵀ Y Nᵢ`.
    pub fn pihat(&self, y: &SymMat) -> SymMat {
        let n = self.n();
        let mut acc = Mat::zeros(n, n);
        for nc in &self.closed_noise {
            acc += &nc.tr_mul(&(y.as_mat() * nc));
        }
        SymMat::symmetrize(&acc)
    }

    /// `C(Y) = Π̂(Y) + M`.
    pub fn lyap_rhs(&self, y: &SymMat) -> SymMat {
        SymMat::symmetrize(&(self.pihat(y).as_mat() + self.m.as_mat()))
    }

    /// `ÂᵀY + YÂ + C`.
    pub fn lyap_residual(&self, y: &SymMat, c: &SymMat) -> SymMat {
        let ya = y.as_mat() * &self.ahat;
        SymMat::symmetrize(&(&(&ya.transpose() + &ya) + c.as_mat()))
    }

    /// Generalized Lyapunov operator `ÂᵀY + YÂ + Π̂(Y) + M`.
    pub fn step_residual(&self, y: &SymMat) -> SymMat {
        self.lyap_residual(y, &self.lyap_rhs(y))
    }

    /// Kronecker matrices `(𝓛, 𝓟)` of `Y ↦ ÂᵀY + YÂ` and `Y ↦ Π̂(Y)`.
    pub fn kron_operators(&self) -> (Mat, Mat) {
        let n = self.n();
        let at = self.ahat.transpose();
        let id = Mat::identity(n);
        let l = &kron(&id, &at) + &kron(&at, &id);
        let mut pm = Mat::zeros(n * n, n * n);
        for nc in &self.closed_noise {
            let t = nc.transpose();
            pm += &kron(&t, &t);
        }
        (l, pm)
    }
}

/// Factorization of `Y ↦ AᵀY + YA` reused across right-hand sides:
/// Kronecker LU for small `n`, complex Schur form otherwise.
pub enum LyapFactor {
    Kron { n: usize, lu: Lu },
    Schur { u: DMatrix<C64>, t: DMatrix<C64> },
}

impl LyapFactor {
    pub fn new(a: &Mat) -> Result<LyapFactor> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("Lyapunov coefficient must be square".into()));
        }
        let n = a.rows();
        if n <= KRON_LYAP_MAX {
            let at = a.transpose();
            let id = Mat::identity(n);
            let l = &kron(&id, &at) + &kron(&at, &id);
            let lu = Lu::new(&l).map_err(|_| Error::Singular("Lyapunov operator"))?;
            return Ok(LyapFactor::Kron { n, lu });
        }
        let (u, t) = complex_schur(a)?;
        Ok(LyapFactor::Schur { u, t })
    }

    /// Solves `AᵀX + XA + C = 0`.
    pub fn solve(&self, c: &SymMat) -> Result<SymMat> {
        match self {
            LyapFactor::Kron { n, lu } => {
                if c.n() != *n {
                    return Err(Error::DimensionMismatch("Lyapunov right-hand side".into()));
                }
                let rhs: Vec<f64> = vec_of(c).iter().map(|v| -v).collect();
                Ok(SymMat::symmetrize(&unvec(&lu.solve_vec(&rhs)?, *n, *n)?))
            }
            LyapFactor::Schur { u, t } => bartels_stewart(u, t, c),
        }
    }
}

/// Solves `AᵀX + XA + C = 0` directly.
pub fn lyap_direct(a: &Mat, c: &SymMat) -> Result<SymMat> {
    LyapFactor::new(a)?.solve(c)
}

fn bartels_stewart(u: &DMatrix<C64>, t: &DMatrix<C64>, c: &SymMat) -> Result<SymMat> {
    let n = u.nrows();
    if c.n() != n {
        return Err(Error::DimensionMismatch("Lyapunov right-hand side".into()));
    }
    let cc = DMatrix::from_fn(n, n, |i, j| C64::new(c[(i, j)], 0.0));
    let f = u.adjoint() * cc * u;
    // Tᴴ W + W T = −F, T upper triangular
    let mut w = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut s = -f[(i, j)];
            for k in 0..i {
                s -= t[(k, i)].conj() * w[(k, j)];
            }
            for l in 0..j {
                s -= w[(i, l)] * t[(l, j)];
            }
            let d = t[(i, i)].conj() + t[(j, j)];
            if d.re == 0.0 && d.im == 0.0 {
                return Err(Error::Singular("Lyapunov operator"));
            }
            w[(i, j)] = s / d;
        }
    }
    let x = u * w * u.adjoint();
    let out = Mat::from_fn(n, n, |i, j| x[(i, j)].re);
    if !out.is_finite() {
        return Err(Error::Singular("Lyapunov operator"));
    }
    Ok(SymMat::symmetrize(&out))
}

enum Inner {
    Direct(LyapFactor),
    Smith(Option<f64>),
}

impl Inner {
    fn prepare(asm: &NewtonAssembly, k: usize, solver: LyapSolver) -> Result<Inner> {
        let ev = eigenvalues(&asm.ahat)?;
        if ev.iter().any(|z| z.re >= 0.0) {
            return Err(Error::UnstableAhat { outer: k });
        }
        match solver {
            LyapSolver::Direct => LyapFactor::new(&asm.ahat)
                .map(Inner::Direct)
                .map_err(|e| Error::InnerBreakdown { outer: k, cause: Box::new(e) }),
            LyapSolver::Smith => {
                let sh = lyapunov_shift(&asm.ahat).map_err(|_| Error::UnstableAhat { outer: k })?;
                Ok(Inner::Smith(Some(sh.gamma)))
            }
        }
    }

    /// Inner solve with its Smith iteration count (0 for direct solves).
    fn solve(&self, a: &Mat, c: &SymMat, tau: f64) -> Result<(SymMat, usize, Vec<Warning>)> {
        match self {
            Inner::Direct(f) => Ok((f.solve(c)?, 0, Vec::new())),
            Inner::Smith(gamma) => {
                let cfg = SdaConfig { stop: StopRule::Relative(tau), max_doublings: MAX_DOUBLINGS, gamma: *gamma, record: false };
                let out = solve_lyapunov_smith(a, c, &cfg)?;
                Ok((out.x, out.iterations, out.warnings))
            }
        }
    }
}

fn normalized(a_fro: f64, y: &SymMat, resid: &SymMat, c: &SymMat, mode: Norm2Mode) -> f64 {
    let num = resid.norm_fro();
    if num == 0.0 {
        return 0.0;
    }
    num / (2.0 * a_fro * y.norm2(mode) + c.norm_fro())
}

/// Result of one outer step.
struct Step {
    x: SymMat,
    inner: usize,
    innermost: usize,
    warnings: Vec<Warning>,
}

fn step_nt1(asm: &NewtonAssembly, x: &SymMat, res: &SymMat) -> Result<Step> {
    let n = asm.n();
    let (l, pm) = asm.kron_operators();
    let lu = Lu::new(&(&l + &pm)).map_err(|_| Error::SingularNewtonSystem)?;
    let rhs: Vec<f64> = vec_of(res).iter().map(|v| -v).collect();
    let z = unvec(&lu.solve_vec(&rhs)?, n, n)?;
    Ok(Step { x: SymMat::symmetrize(&(x.as_mat() + &z)), inner: 1, innermost: 0, warnings: Vec::new() })
}

fn step_fixed_point(
    asm: &NewtonAssembly,
    x: &SymMat,
    k: usize,
    solver: LyapSolver,
    cfg: &NewtonConfig,
) -> Result<Step> {
    let inner_solver = Inner::prepare(asm, k, solver)?;
    let a_fro = asm.ahat.norm_fro();
    let mut y = x.clone();
    let c = asm.lyap_rhs(&y);
    let mut resid = asm.lyap_residual(&y, &c);
    let r0 = normalized(a_fro, &y, &resid, &c, cfg.norm2);
    let target = r0 * r0;
    let mut ratio = r0;
    let mut inner = 0;
    let mut innermost = 0;
    let mut warnings = Vec::new();
    let noiseless = asm.closed_noise.iter().all(|nc| nc.max_abs() == 0.0);
    while ratio > target {
        if inner >= cfg.max_inner {
            warnings.push(Warning::InnerCapReached { outer: k, iterations: inner });
            break;
        }
        let (z, its, w) = inner_solver
            .solve(&asm.ahat, &resid, cfg.tau)
            .map_err(|e| Error::InnerBreakdown { outer: k, cause: Box::new(e) })?;
        warnings.extend(w.into_iter().map(|w| w.with_outer(k)));
        let y_next = SymMat::symmetrize(&(y.as_mat() + z.as_mat()));
        let c_next = asm.lyap_rhs(&y_next);
        let resid_next = asm.lyap_residual(&y_next, &c_next);
        let ratio_next = normalized(a_fro, &y_next, &resid_next, &c_next, cfg.norm2);
        inner += 1;
        innermost += its;
        y = y_next;
        resid = resid_next;
        // without noise the right-hand side is constant and one direct solve is exact
        if noiseless && solver == LyapSolver::Direct {
            break;
        }
        // rounding floor: the residual stopped decreasing
        if ratio_next >= ratio && inner > 1 {
            warnings.push(Warning::InnerStalled { outer: k, iterations: inner });
            break;
        }
        ratio = ratio_next;
    }
    Ok(Step { x: y, inner, innermost, warnings })
}

fn step_modified(asm: &NewtonAssembly, x: &SymMat, res: &SymMat, k: usize, cfg: &NewtonConfig) -> Result<Step> {
    let inner_solver = Inner::prepare(asm, k, cfg.mnt_inner)?;
    let (z, its, w) = inner_solver
        .solve(&asm.ahat, res, cfg.tau)
        .map_err(|e| Error::InnerBreakdown { outer: k, cause: Box::new(e) })?;
    Ok(Step {
        x: SymMat::symmetrize(&(x.as_mat() + z.as_mat())),
        inner: 1,
        innermost: its,
        warnings: w.into_iter().map(|w| w.with_outer(k)).collect(),
    })
}

/// Runs one of the Newton variants (`Nt1`, `Nt2`, `Nt3`, `Mnt`).
pub fn solve(p: &Problem, method: Method, cfg: &NewtonConfig) -> Result<SolveReport> {
    if !method.is_newton() {
        return Err(Error::InvalidProblem("not a Newton method".into()));
    }
    let n = p.n();
    if method == Method::Nt1 && n > cfg.n_kron_max {
        return Err(Error::ProblemTooLargeForDirect { n, limit: cfg.n_kron_max });
    }
    let (x0, warm) = match &cfg.x0 {
        Some(x0) if x0.n() != n => {
            return Err(Error::DimensionMismatch("initial iterate has the wrong size".into()))
        }
        Some(x0) => (x0.clone(), None),
        None => {
            let w = fpsda::initial_for_newton(p, cfg.delta, &FpsdaConfig { norm2: cfg.norm2, ..cfg.warm.clone() })?;
            (w.x.clone(), Some(Box::new(w)))
        }
    };
    let mut x = x0;
    let (mut res, mut nr) = residual_and_nres(p, &x, cfg.norm2)?;
    let mut rep = SolveReport::new(method, x.clone(), cfg.norm2);
    rep.warm_start = warm;
    rep.nres_history.push(nr);
    if cfg.record {
        rep.iterates.push(x.clone());
    }
    let mut guard = DivergenceGuard::new(nr);
    let mut k = 0;
    while nr > cfg.eps {
        if k >= cfg.max_outer {
            rep.x = x;
            return Err(Error::MaxIterationsExceeded(Some(Box::new(rep))));
        }
        let asm = assemble(p, &x)?;
        let step = match method {
            Method::Nt1 => step_nt1(&asm, &x, &res)?,
            Method::Nt2 => step_fixed_point(&asm, &x, k, LyapSolver::Direct, cfg)?,
            Method::Nt3 => step_fixed_point(&asm, &x, k, LyapSolver::Smith, cfg)?,
            _ => step_modified(&asm, &x, &res, k, cfg)?,
        };
        rep.inner.push(step.inner);
        rep.innermost.push(step.innermost);
        rep.warnings.extend(step.warnings);
        x = step.x;
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
    if matches!(method, Method::Nt1 | Method::Nt2) {
        rep.innermost.clear();
    }
    rep.closed_loop = eigenvalues(&frozen(p, &x)?.closed_loop(&x))?;
    rep.x = x;
    Ok(rep)
}

/// Spectral radius of `𝓛⁻¹𝓟` for the step operator at `X`; below one the
/// inner fixed-point iteration converges.
pub fn inner_contraction(p: &Problem, x: &SymMat) -> Result<f64> {
    let asm = assemble(p, x)?;
    let (l, pm) = asm.kron_operators();
    let lu = Lu::new(&l).map_err(|_| Error::Singular("Lyapunov operator"))?;
    let t = lu.solve(&pm)?;
    Ok(eigenvalues(&t)?.iter().fold(0.0, |m, z| m.max(z.re.hypot(z.im))))
}
