//! Problem data, the noise operator Π and the residual of the stochastic
//! Riccati equation
//!
//! ```text
//! R(X) = AᵀX + XA + Q + Π₁₁(X) − S(X) [R + Π₂₂(X)]⁻¹ S(X)ᵀ,
//! S(X) = XB + L + Π₁₂(X).
//! ```

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matlib::{eigenvalues, sym_eig, to_na, Lu, Mat, Norm2Mode, SymMat, C64};

/// Relative tolerance for semidefiniteness of the weight block.
pub const PSD_TOL: f64 = 1e-10;
/// Real-part cutoff used by the Hautus diagnostics.
pub const HAUTUS_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Problem {
    a: Mat,
    b: Mat,
    q: SymMat,
    l: Mat,
    r: SymMat,
    a0: Vec<Mat>,
    b0: Vec<Mat>,
    psd_defect: Option<f64>,
}

impl Problem {
    /// Validates shapes, finiteness and symmetry; `R` must be positive
    /// definite.
    pub fn new(a: Mat, b: Mat, q: Mat, l: Mat, r: Mat, a0: Vec<Mat>, b0: Vec<Mat>) -> Result<Problem> {
        let n = a.rows();
        let m = b.cols();
        let bad = |what: &str| Err(Error::InvalidProblem(what.into()));
        if !a.is_square() || n == 0 {
            return bad("A must be square and non-empty");
        }
        if b.rows() != n || m == 0 {
            return Err(Error::InvalidProblem(format!("B must be {}x(m>0), got {}x{}", n, b.rows(), m)));
        }
        if q.shape() != (n, n) {
            return Err(Error::InvalidProblem(format!("Q must be {}x{}", n, n)));
        }
        if l.shape() != (n, m) {
            return Err(Error::InvalidProblem(format!("L must be {}x{}", n, m)));
        }
        if r.shape() != (m, m) {
            return Err(Error::InvalidProblem(format!("R must be {}x{}", m, m)));
        }
        if a0.len() != b0.len() {
            return bad("A0 and B0 must have the same number of terms");
        }
        for (i, (ai, bi)) in a0.iter().zip(&b0).enumerate() {
            if ai.shape() != (n, n) || bi.shape() != (n, m) {
                return Err(Error::InvalidProblem(format!("noise term {} has wrong shape", i + 1)));
            }
        }
        let all = [&a, &b, &q, &l, &r];
        if all.iter().any(|x| !x.is_finite()) || a0.iter().chain(&b0).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let q = SymMat::new(q).map_err(|_| Error::InvalidProblem("Q is not symmetric".into()))?;
        let r = SymMat::new(r).map_err(|_| Error::InvalidProblem("R is not symmetric".into()))?;
        if r.min_eig()? <= 0.0 {
            return bad("R must be positive definite");
        }
        let w = SymMat::symmetrize(&Mat::vstack(&[
            &Mat::hstack(&[q.as_mat(), &l])?,
            &Mat::hstack(&[&l.transpose(), r.as_mat()])?,
        ])?);
        let ev = w.eig()?.values;
        let scale = ev.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let low = ev[0];
        if low < -PSD_TOL * scale {
            return Err(Error::InvalidProblem(format!(
                "[[Q, L], [Lᵀ, R]] is indefinite (smallest eigenvalue {:e})",
                low
            )));
        }
        let psd_defect = if low < 0.0 { Some(low) } else { None };
        Ok(Problem { a, b, q, l, r, a0, b0, psd_defect })
    }

    /// Negative smallest eigenvalue of `[[Q, L], [Lᵀ, R]]` when it is within
    /// rounding of zero.
    pub fn psd_defect(&self) -> Option<f64> {
        self.psd_defect
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }
    pub fn m(&self) -> usize {
        self.b.cols()
    }
    /// Number of noise terms.
    pub fn noise_terms(&self) -> usize {
        self.a0.len()
    }
    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn q(&self) -> &SymMat {
        &self.q
    }
    pub fn l(&self) -> &Mat {
        &self.l
    }
    pub fn r(&self) -> &SymMat {
        &self.r
    }
    pub fn a0(&self) -> &[Mat] {
        &self.a0
    }
    pub fn b0(&self) -> &[Mat] {
        &self.b0
    }

    fn check_x(&self, x: &SymMat) -> Result<()> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch(format!("X is {}x{}, problem has n = {}", x.n(), x.n(), self.n())));
        }
        Ok(())
    }
}

/// The three blocks of the noise operator.
#[derive(Clone, Debug)]
pub struct Pi {
    pub p11: SymMat,
    pub p12: Mat,
    pub p22: SymMat,
}

/// `Π₁₁ = Σ A0ᵢᵀ X A0ᵢ`, `Π₁₂ = Σ A0ᵢᵀ X B0ᵢ`, `Π₂₂ = Σ B0ᵢᵀ X B0ᵢ`.
pub fn pi(p: &Problem, x: &SymMat) -> Result<Pi> {
    p.check_x(x)?;
    let (n, m) = (p.n(), p.m());
    let mut p11 = Mat::zeros(n, n);
    let mut p12 = Mat::zeros(n, m);
    let mut p22 = Mat::zeros(m, m);
    for (a0, b0) in p.a0.iter().zip(&p.b0) {
        let xa = x.as_mat() * a0;
        let xb = x.as_mat() * b0;
        p11 += &a0.tr_mul(&xa);
        p12 += &a0.tr_mul(&xb);
        p22 += &b0.tr_mul(&xb);
    }
    Ok(Pi { p11: SymMat::symmetrize(&p11), p12, p22: SymMat::symmetrize(&p22) })
}

/// Coefficients of the deterministic CARE obtained by freezing Π at `X`:
/// `A_cᵀY + YA_c − YG_cY + H_c = 0`.
#[derive(Clone, Debug)]
pub struct Frozen {
    pub pi: Pi,
    pub lc: Mat,
    pub rc: SymMat,
    pub qc: SymMat,
    pub ac: Mat,
    pub gc: SymMat,
    pub hc: SymMat,
}

pub fn frozen(p: &Problem, x: &SymMat) -> Result<Frozen> {
    let pi = pi(p, x)?;
    let lc = &p.l + &pi.p12;
    let rc = SymMat::symmetrize(&(p.r.as_mat() + pi.p22.as_mat()));
    let qc = SymMat::symmetrize(&(p.q.as_mat() + pi.p11.as_mat()));
    let lu = Lu::new(&rc).map_err(|_| Error::SingularRc)?;
    let rinv_bt = lu.solve(&p.b.transpose())?;
    let rinv_lct = lu.solve(&lc.transpose())?;
    let ac = &p.a - &(&p.b * &rinv_lct);
    let gc = SymMat::symmetrize(&(&p.b * &rinv_bt));
    let hc = SymMat::symmetrize(&(qc.as_mat() - &(&lc * &rinv_lct)));
    Ok(Frozen { pi, lc, rc, qc, ac, gc, hc })
}

impl Frozen {
    /// CARE residual `A_cᵀY + YA_c − YG_cY + H_c`.
    pub fn care_residual(&self, y: &SymMat) -> SymMat {
        care_residual(&self.ac, &self.gc, &self.hc, y)
    }

    /// `A_c − G_c Y`.
    pub fn closed_loop(&self, y: &SymMat) -> Mat {
        &self.ac - &(self.gc.as_mat() * y.as_mat())
    }
}

/// `AᵀY + YA − YGY + H`.
pub fn care_residual(a: &Mat, g: &SymMat, h: &SymMat, y: &SymMat) -> SymMat {
    let ya = y.as_mat() * a;
    let ygy = &(y.as_mat() * g.as_mat()) * y.as_mat();
    SymMat::symmetrize(&(&(&(&ya.transpose() + &ya) - &ygy) + h.as_mat()))
}

/// `S(X) = XB + L + Π₁₂(X)`.
pub fn s_of(p: &Problem, x: &SymMat, pi: &Pi) -> Mat {
    &(&(x.as_mat() * &p.b) + &p.l) + &pi.p12
}

/// Residual computed from the defining formula.
pub fn residual(p: &Problem, x: &SymMat) -> Result<SymMat> {
    let pi = pi(p, x)?;
    residual_with(p, x, &pi)
}

fn residual_with(p: &Problem, x: &SymMat, pi: &Pi) -> Result<SymMat> {
    let s = s_of(p, x, pi);
    let rc = SymMat::symmetrize(&(p.r.as_mat() + pi.p22.as_mat()));
    let lu = Lu::new(&rc).map_err(|_| Error::SingularRc)?;
    let srs = &s * &lu.solve(&s.transpose())?;
    let xa = x.as_mat() * &p.a;
    let sum = &(&(&(&xa.transpose() + &xa) + p.q.as_mat()) + pi.p11.as_mat()) - &srs;
    Ok(SymMat::symmetrize(&sum))
}

/// Residual and the normalized residual
/// `‖R(X)‖_F / (2‖A‖_F‖X‖₂ + ‖Q‖_F + ‖Π₁₁‖_F + ‖S‖₂² ‖R_c⁻¹‖_F)`.
pub fn residual_and_nres(p: &Problem, x: &SymMat, mode: Norm2Mode) -> Result<(SymMat, f64)> {
    let pi = pi(p, x)?;
    let res = residual_with(p, x, &pi)?;
    let s = s_of(p, x, &pi);
    let rc = SymMat::symmetrize(&(p.r.as_mat() + pi.p22.as_mat()));
    let rc_inv = Lu::new(&rc).map_err(|_| Error::SingularRc)?.inverse();
    let s2 = s.norm2(mode);
    let den = 2.0 * p.a.norm_fro() * x.norm2(mode)
        + p.q.norm_fro()
        + pi.p11.norm_fro()
        + s2 * s2 * rc_inv.norm_fro();
    let num = res.norm_fro();
    let nres = if num == 0.0 { 0.0 } else { num / den };
    Ok((res, nres))
}

pub fn nres(p: &Problem, x: &SymMat, mode: Norm2Mode) -> Result<f64> {
    Ok(residual_and_nres(p, x, mode)?.1)
}

/// `F = −[R + Π₂₂(X)]⁻¹ [BᵀX + Σ B0ᵢᵀ X A0ᵢ + Lᵀ]`.
pub fn feedback_gain(p: &Problem, x: &SymMat) -> Result<Mat> {
    let pi = pi(p, x)?;
    let rc = SymMat::symmetrize(&(p.r.as_mat() + pi.p22.as_mat()));
    let lu = Lu::new(&rc).map_err(|_| Error::SingularRc)?;
    Ok(-lu.solve(&s_of(p, x, &pi).transpose())?)
}

/// `Ω = [[−G_c, −A_c], [−A_cᵀ, H_c]]`, so that `[X, −I] Ω [X; −I] = R(X)`.
pub fn omega(fz: &Frozen) -> SymMat {
    let n = fz.ac.rows();
    let mut o = Mat::zeros(2 * n, 2 * n);
    o.set_block(0, 0, &-fz.gc.as_mat());
    o.set_block(0, n, &-&fz.ac);
    o.set_block(n, 0, &-fz.ac.transpose());
    o.set_block(n, n, fz.hc.as_mat());
    SymMat::symmetrize(&o)
}

/// Spectrum of `A_c(X) − G_c(X) X`.
pub fn closed_loop_spectrum(p: &Problem, x: &SymMat) -> Result<Vec<C64>> {
    eigenvalues(&frozen(p, x)?.closed_loop(x))
}

/// Hautus test: `[A − λI, B]` has full row rank for every eigenvalue `λ` of
/// `A` with `Re λ ≥ −tol`.
pub fn check_stabilizable(a: &Mat, b: &Mat, tol: f64) -> Result<bool> {
    if !a.is_square() || b.rows() != a.rows() {
        return Err(Error::DimensionMismatch("check_stabilizable".into()));
    }
    let n = a.rows();
    let ab = Mat::hstack(&[a, b])?;
    let scale = ab.norm2_exact().max(1.0);
    for lam in eigenvalues(a)? {
        if lam.re < -tol {
            continue;
        }
        let mut m = to_na(&ab).map(|v| C64::new(v, 0.0));
        for i in 0..n {
            m[(i, i)] -= lam;
        }
        let sv = m
            .try_svd(false, false, f64::EPSILON, 10_000)
            .ok_or(Error::Singular("singular value decomposition"))?
            .singular_values;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= tol * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dual of [`check_stabilizable`]: `[A − λI; C]` has full column rank.
pub fn check_detectable(c: &Mat, a: &Mat, tol: f64) -> Result<bool> {
    if c.cols() != a.rows() {
        return Err(Error::DimensionMismatch("check_detectable".into()));
    }
    check_stabilizable(&a.transpose(), &c.transpose(), tol)
}

/// A factor `C` with `CᵀC = Q − L R⁻¹ Lᵀ`, negative eigenvalues clamped.
pub fn output_factor(p: &Problem) -> Result<Mat> {
    let lu = Lu::new(&p.r)?;
    let k = SymMat::symmetrize(&(p.q.as_mat() - &(&p.l * &lu.solve(&p.l.transpose())?)));
    let e = sym_eig(&k)?;
    let n = p.n();
    Ok(Mat::from_fn(n, n, |i, j| e.values[i].max(0.0).sqrt() * e.vectors[(j, i)]))
}

/// Hautus surrogates for stabilizability of `(A, B)` and detectability of
/// `(C, A)`.
pub fn diagnostics(p: &Problem) -> Result<(bool, bool)> {
    let c = output_factor(p)?;
    Ok((check_stabilizable(&p.a, &p.b, HAUTUS_TOL)?, check_detectable(&c, &p.a, HAUTUS_TOL)?))
}
