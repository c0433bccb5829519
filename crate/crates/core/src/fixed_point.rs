//! Two fixed-point maps whose fixed point is the stabilizing solution.
//!
//! * [`GuoLiang`] is a Cayley-transformed map with coefficients computed
//!   once; one application factors a matrix of order `n(r + 1)`.
//! * [`Sf1Map`] freezes Π at the current iterate and applies the first
//!   doubling relation `F(Y) = X_c + E_cᵀ Y (I − Y_c Y)⁻¹ E_c`; one
//!   application factors three matrices of order `n`.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::care_sda::{sda_init_tallied, select_shift};
use crate::error::{Error, Result};
use crate::fpsda::DivergenceGuard;
use crate::matlib::{eigenvalues, sym_eig, FactorTally, Lu, Mat, Norm2Mode, SymMat};
use crate::report::{Method, SolveReport, Warning};
use crate::scare_model::{frozen, residual_and_nres, Frozen, Problem};

/// Permutation sending stacked blocks `(a, i)` at `a·n + i` to the
/// interleaved index `i·r + a`, so that `Pᵀ(X ⊗ I_r)P = I_r ⊗ X`.
pub fn shuffle_perm(n: usize, r: usize) -> Vec<usize> {
    let mut p = vec_usize(n * r);
    for a in 0..r {
        for i in 0..n {
            p[a * n + i] = i * r + a;
        }
    }
    p
}

/// Permutation with `P̂ᵀ(X ⊗ I_{r+1})P̂ = diag(X, X ⊗ I_r)`.
pub fn shuffle_perm_hat(n: usize, r: usize) -> Vec<usize> {
    let mut p = vec_usize(n * (r + 1));
    for i in 0..n {
        p[i] = i * (r + 1);
        for a in 0..r {
            p[n + i * r + a] = i * (r + 1) + 1 + a;
        }
    }
    p
}

fn vec_usize(len: usize) -> Vec<usize> {
    (0..len).collect()
}

/// Permutation matrix whose column `k` is `e_{perm[k]}`.
pub fn perm_matrix(perm: &[usize]) -> Mat {
    let mut m = Mat::zeros(perm.len(), perm.len());
    for (k, &p) in perm.iter().enumerate() {
        m[(p, k)] = 1.0;
    }
    m
}

fn permute_rows(perm: &[usize], v: &Mat) -> Mat {
    let mut out = Mat::zeros(v.rows(), v.cols());
    for (k, &p) in perm.iter().enumerate() {
        for j in 0..v.cols() {
            out[(p, j)] = v[(k, j)];
        }
    }
    out
}

/// `X ⊗ I_k`.
pub fn kron_identity(x: &Mat, k: usize) -> Mat {
    let n = x.rows();
    let mut out = Mat::zeros(n * k, n * k);
    for i in 0..n {
        for j in 0..n {
            let v = x[(i, j)];
            for a in 0..k {
                out[(i * k + a, j * k + a)] = v;
            }
        }
    }
    out
}

fn sym_power(r: &SymMat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let e = sym_eig(r)?;
    let v = &e.vectors;
    let d: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
    Ok(&(v * &Mat::diag(&d)) * &v.transpose())
}

/// Precomputed coefficients `(E_γ, H_γ, G_γ)` of the Cayley-transformed map
/// `F(X) = E_γᵀ (X⊗I) [I + G_γ (X⊗I)]⁻¹ E_γ + H_γ`.
#[derive(Clone, Debug)]
pub struct GuoLiang {
    pub gamma: f64,
    pub n: usize,
    pub r: usize,
    pub e: Mat,
    pub h: SymMat,
    pub g: SymMat,
    /// `Â = A − BR⁻¹Lᵀ`.
    pub ahat: Mat,
    /// `B̂ = BR^{-1/2}`.
    pub bhat: Mat,
    /// `Ĉ` with `ĈᵀĈ = Q − LR⁻¹Lᵀ`.
    pub chat: Mat,
    pub perm: Vec<usize>,
    pub perm_hat: Vec<usize>,
}

impl GuoLiang {
    /// Builds the map; without `gamma` the shift comes from the rectangle rule
    /// on `(Â, B̂B̂ᵀ, ĈᵀĈ)`, falling back to `−max(‖Â‖∞, 1)`.
    pub fn new(p: &Problem, gamma: Option<f64>) -> Result<GuoLiang> {
        let (n, r) = (p.n(), p.noise_terms());
        let rinv = sym_power(p.r(), |l| 1.0 / l)?;
        let rinv_half = sym_power(p.r(), |l| 1.0 / l.sqrt())?;
        let rinv_lt = &rinv * &p.l().transpose();
        let ahat = p.a() - &(p.b() * &rinv_lt);
        let bhat = p.b() * &rinv_half;
        let qt = SymMat::symmetrize(&(p.q().as_mat() - &(p.l() * &rinv_lt)));
        let qe = sym_eig(&qt)?;
        let chat = Mat::from_fn(n, n, |i, j| qe.values[i].max(0.0).sqrt() * qe.vectors[(j, i)]);
        let gamma = match gamma {
            Some(g) => g,
            None => {
                let g0 = SymMat::symmetrize(&bhat.mul_tr(&bhat));
                let h0 = SymMat::symmetrize(&chat.tr_mul(&chat));
                match select_shift(&ahat, &g0, &h0) {
                    Ok(sh) => sh.gamma,
                    Err(_) => -ahat.norm_inf().max(1.0),
                }
            }
        };
        if !(gamma < 0.0) {
            return Err(Error::InvalidProblem("shift must be negative".into()));
        }
        let perm = shuffle_perm(n, r);
        let perm_hat = shuffle_perm_hat(n, r);
        let a0s: Vec<&Mat> = p.a0().iter().collect();
        let b0s: Vec<&Mat> = p.b0().iter().collect();
        let (cal_a, cal_b) = if r > 0 {
            let sa = Mat::vstack(&a0s)?;
            let sb = Mat::vstack(&b0s)?;
            (permute_rows(&perm, &(&sa - &(&sb * &rinv_lt))), permute_rows(&perm, &(&sb * &rinv_half)))
        } else {
            (Mat::zeros(0, n), Mat::zeros(0, p.m()))
        };
        let ag = ahat.add_diag(gamma);
        let lu_ag = Lu::new(&ag).map_err(|_| Error::SingularShiftedMatrix)?;
        let ag_inv = lu_ag.inverse();
        let ag_inv_b = lu_ag.solve(&bhat)?;
        let z = &chat * &ag_inv_b;
        let zt_c = z.tr_mul(&chat);
        let sq = (-2.0 * gamma).sqrt();
        let top = &ahat.add_diag(-gamma) + &(&bhat * &zt_c);
        let bottom = (&cal_a + &(&cal_b * &zt_c)).scale(sq);
        let corr = Lu::new(&(&ag_inv_b * &zt_c).add_diag(1.0)).map_err(|_| Error::Singular("Cayley transform"))?;
        let w = corr.solve(&ag_inv)?;
        let e = permute_rows(&perm_hat, &(&Mat::vstack(&[&top, &bottom])? * &w));
        let izz = Lu::new(&z.mul_tr(&z).add_diag(1.0))?;
        let c_ag = &chat * &ag_inv;
        let h = c_ag.tr_mul(&izz.solve(&c_ag)?).scale(-2.0 * gamma);
        let v = Mat::vstack(&[&ag_inv_b.scale(sq), &(&(&cal_a * &ag_inv_b) - &cal_b)])?;
        let v = permute_rows(&perm_hat, &v);
        let izz2 = Lu::new(&z.tr_mul(&z).add_diag(1.0))?;
        let g = &v * &izz2.solve(&v.transpose())?;
        Ok(GuoLiang {
            gamma,
            n,
            r,
            e,
            h: SymMat::symmetrize(&h),
            g: SymMat::symmetrize(&g),
            ahat,
            bhat,
            chat,
            perm,
            perm_hat,
        })
    }

    pub fn p_matrix(&self) -> Mat {
        perm_matrix(&self.perm)
    }

    pub fn p_hat_matrix(&self) -> Mat {
        perm_matrix(&self.perm_hat)
    }

    pub fn apply(&self, x: &SymMat) -> Result<SymMat> {
        self.apply_tallied(x, &mut FactorTally::default())
    }

    pub fn apply_tallied(&self, x: &SymMat, tally: &mut FactorTally) -> Result<SymMat> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch("iterate size".into()));
        }
        let xk = kron_identity(x, self.r + 1);
        let t = (self.g.as_mat() * &xk).add_diag(1.0);
        let lu = tally.factor(&t).map_err(|_| Error::SingularInnerMatrix)?;
        let te = lu.solve(&self.e)?;
        let f = &self.e.tr_mul(&(&xk * &te)) + self.h.as_mat();
        Ok(SymMat::symmetrize(&f))
    }
}

/// SF1 coefficients frozen at an iterate `X`: the first doubling state
/// `(E_c, X_c, Y_c)` of `A_cᵀY + YA_c − YG_cY + H_c = 0`.
#[derive(Clone, Debug)]
pub struct Sf1Map {
    pub gamma: f64,
    pub e: Mat,
    pub xc: SymMat,
    pub yc: SymMat,
}

impl Sf1Map {
    pub fn at(fz: &Frozen, gamma: f64, tally: &mut FactorTally) -> Result<Sf1Map> {
        let st = sda_init_tallied(&fz.ac, &fz.gc, &fz.hc, gamma, tally)?;
        Ok(Sf1Map { gamma, e: st.e, xc: st.x, yc: st.y })
    }

    /// `X_c + E_cᵀ Y (I − Y_c Y)⁻¹ E_c`.
    pub fn apply_to(&self, y: &SymMat, tally: &mut FactorTally) -> Result<SymMat> {
        let n = y.n();
        let m = &Mat::identity(n) - &(self.yc.as_mat() * y.as_mat());
        let lu = tally.factor(&m).map_err(|_| Error::SingularInnerMatrix)?;
        let we = lu.solve(&self.e)?;
        Ok(SymMat::symmetrize(&(self.xc.as_mat() + &self.e.tr_mul(&(y.as_mat() * &we)))))
    }
}

/// Shift for SF1 at `X` from the frozen Hamiltonian.
pub fn sf1_shift(fz: &Frozen) -> Result<f64> {
    Ok(select_shift(&fz.ac, &fz.gc, &fz.hc)?.gamma)
}

/// One SF1 application `X ↦ F_X(X)` with coefficients frozen at `X`.
pub fn sf1_apply(p: &Problem, x: &SymMat, gamma: Option<f64>, tally: &mut FactorTally) -> Result<SymMat> {
    let fz = frozen(p, x)?;
    let g = match gamma {
        Some(g) => g,
        None => sf1_shift(&fz)?,
    };
    Sf1Map::at(&fz, g, tally)?.apply_to(x, tally)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointOp {
    GuoLiang,
    Sf1,
}

pub const STALL_ACCEPT: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct FixedPointConfig {
    pub eps: f64,
    /// Give up on `eps` once the residual has not reached a new minimum for
    /// this many steps. The best iterate is returned if it is within
    /// `STALL_ACCEPT * eps`, otherwise the run fails.
    pub stall_window: usize,
    pub max_outer: usize,
    pub norm2: Norm2Mode,
    /// Fixed shift. Guo–Liang defaults to the rectangle rule on the noise-free
    /// Hamiltonian, SF1 picks one per step.
    pub gamma: Option<f64>,
    pub x0: Option<SymMat>,
    pub record: bool,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig { eps: 1e-14, stall_window: 100, max_outer: 5000, norm2: Norm2Mode::Auto, gamma: None, x0: None, record: false }
    }
}

/// Iterates `X_{k+1} = F(X_k)` until the normalized residual is below `eps`.
pub fn solve(p: &Problem, op: FixedPointOp, cfg: &FixedPointConfig) -> Result<SolveReport> {
    let n = p.n();
    let method = match op {
        FixedPointOp::GuoLiang => Method::FpGl,
        FixedPointOp::Sf1 => Method::FpSf1,
    };
    let mut x = match &cfg.x0 {
        Some(x0) if x0.n() != n => {
            return Err(Error::DimensionMismatch("initial iterate has the wrong size".into()))
        }
        Some(x0) => x0.clone(),
        None => SymMat::zeros(n),
    };
    let gl = match op {
        FixedPointOp::GuoLiang => Some(GuoLiang::new(p, cfg.gamma)?),
        FixedPointOp::Sf1 => None,
    };
    let mut nr = residual_and_nres(p, &x, cfg.norm2)?.1;
    let mut rep = SolveReport::new(method, x.clone(), cfg.norm2);
    rep.nres_history.push(nr);
    if cfg.record {
        rep.iterates.push(x.clone());
    }
    let mut guard = DivergenceGuard::new(nr);
    let mut prev_gamma = None;
    let mut tally = FactorTally::default();
    let mut best = (nr, x.clone(), 0);
    let mut k = 0;
    while nr > cfg.eps {
        if k >= cfg.max_outer {
            rep.x = x;
            return Err(Error::MaxIterationsExceeded(Some(Box::new(rep))));
        }
        tally.clear();
        let x_next = match &gl {
            Some(gl) => gl.apply_tallied(&x, &mut tally)?,
            None => {
                let fz = frozen(p, &x)?;
                let g = match cfg.gamma {
                    Some(g) => g,
                    None => match sf1_shift(&fz) {
                        Ok(g) => g,
                        Err(e) => match prev_gamma {
                            Some(g) => {
                                rep.warnings.push(Warning::ShiftReused { outer: k, gamma: g });
                                g
                            }
                            None => return Err(Error::InnerBreakdown { outer: k, cause: Box::new(e) }),
                        },
                    },
                };
                prev_gamma = Some(g);
                Sf1Map::at(&fz, g, &mut tally)?.apply_to(&x, &mut tally)?
            }
        };
        rep.inner.push(tally.count());
        x = x_next;
        nr = residual_and_nres(p, &x, cfg.norm2)?.1;
        rep.nres_history.push(nr);
        if cfg.record {
            rep.iterates.push(x.clone());
        }
        k += 1;
        if guard.push(nr) {
            rep.x = x;
            return Err(Error::DivergenceDetected(Box::new(rep)));
        }
        if nr < best.0 {
            best = (nr, x.clone(), k);
        } else if k - best.2 >= cfg.stall_window {
            rep.warnings.push(Warning::Stagnated { outer: best.2, nres: best.0 });
            rep.nres_history.truncate(best.2 + 1);
            rep.inner.truncate(best.2);
            if cfg.record {
                rep.iterates.truncate(best.2 + 1);
            }
            x = best.1;
            if best.0 > STALL_ACCEPT * cfg.eps {
                rep.x = x;
                return Err(Error::MaxIterationsExceeded(Some(Box::new(rep))));
            }
            break;
        }
    }
    rep.closed_loop = eigenvalues(&frozen(p, &x)?.closed_loop(&x))?;
    rep.x = x;
    Ok(rep)
}
