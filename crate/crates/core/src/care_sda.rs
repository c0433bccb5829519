//! Structure-preserving doubling for `AᵀX + XA − XGX + H = 0` and its
//! `G = 0` special case, the Smith iteration for `AᵀX + XA + H = 0`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matlib::{eigenvalues, FactorTally, Lu, Mat, SymMat, C64};
use crate::report::Warning;
use crate::scare_model::care_residual;

/// Maximum number of doublings before giving up.
pub const MAX_DOUBLINGS: usize = 60;

/// Pivot ratio of `A + γI` below which γ is enlarged.
const PIVOT_RATIO_MIN: f64 = 1e-13;
const SHIFT_GROWTH: f64 = 1.05;
const SHIFT_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// `‖residual‖_F ≤ τ ‖H‖_F`.
    Relative(f64),
    /// `‖residual‖_F ≤ target`.
    Absolute(f64),
}

impl StopRule {
    fn target(self, h_norm: f64) -> f64 {
        match self {
            StopRule::Relative(tau) => tau * h_norm,
            StopRule::Absolute(t) => t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdaConfig {
    pub stop: StopRule,
    pub max_doublings: usize,
    /// Fixed shift; chosen by [`select_shift`] when absent.
    pub gamma: Option<f64>,
    /// Keep every iterate in the outcome.
    pub record: bool,
}

impl Default for SdaConfig {
    fn default() -> Self {
        SdaConfig { stop: StopRule::Relative(0.125), max_doublings: MAX_DOUBLINGS, gamma: None, record: false }
    }
}

#[derive(Clone, Debug)]
pub struct SdaOutcome {
    pub x: SymMat,
    /// Number of iterates formed, the initial one included.
    pub iterations: usize,
    pub gamma: f64,
    pub residual_norm: f64,
    pub warnings: Vec<Warning>,
    pub iterates: Vec<SymMat>,
}

/// Shift chosen from the bounding rectangle `[a, b] × [−c, c]` of a set of
/// left-half-plane eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shift {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// True when `b` was too close to zero and the fallback shift was used.
    pub degenerate: bool,
}

/// `γ = −√(b² + c²)` when `c² ≥ b(a − b)/2`, else `γ = −√(ab − c²)`.
pub fn rectangle_shift(a: f64, b: f64, c: f64) -> f64 {
    if c * c >= b * (a - b) / 2.0 {
        -(b * b + c * c).sqrt()
    } else {
        -(a * b - c * c).sqrt()
    }
}

fn shift_from(eigs: &[C64], scale: f64) -> Result<Shift> {
    if eigs.is_empty() || eigs.iter().all(|z| z.re >= 0.0) {
        return Err(Error::NoStableEigenvalues);
    }
    let a = eigs.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    let b = eigs.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let c = eigs.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if b >= -1e-12 {
        let gamma = -(1e-8f64).max(scale * 1e-8);
        return Ok(Shift { gamma, a, b, c, degenerate: true });
    }
    Ok(Shift { gamma: rectangle_shift(a, b, c), a, b, c, degenerate: false })
}

/// Shift for the CARE from the `n` leftmost eigenvalues of the Hamiltonian
/// `[[A, −G], [−H, −Aᵀ]]`.
pub fn select_shift(a: &Mat, g: &SymMat, h: &SymMat) -> Result<Shift> {
    let n = a.rows();
    let mut ham = Mat::zeros(2 * n, 2 * n);
    ham.set_block(0, 0, a);
    ham.set_block(0, n, &-g.as_mat());
    ham.set_block(n, 0, &-h.as_mat());
    ham.set_block(n, n, &-a.transpose());
    let mut ev = eigenvalues(&ham)?;
    ev.sort_by(|p, q| p.re.total_cmp(&q.re));
    ev.truncate(n);
    shift_from(&ev, a.norm_inf())
}

/// Shift for the Lyapunov equation from the eigenvalues of a stable `A`.
pub fn lyapunov_shift(a: &Mat) -> Result<Shift> {
    let ev = eigenvalues(a)?;
    if ev.iter().any(|z| z.re >= 0.0) {
        return Err(Error::NoStableEigenvalues);
    }
    shift_from(&ev, a.norm_inf())
}

/// Factors `A + γI`, enlarging γ when the pivots are badly scaled.
fn shifted_lu(a: &Mat, gamma: f64, warnings: &mut Vec<Warning>) -> Result<(f64, Lu)> {
    let mut g = gamma;
    for attempt in 0..=SHIFT_RETRIES {
        match Lu::new(&a.add_diag(g)) {
            Ok(lu) if lu.pivot_ratio() >= PIVOT_RATIO_MIN => return Ok((g, lu)),
            Ok(lu) if attempt == SHIFT_RETRIES => return Ok((g, lu)),
            _ if attempt == SHIFT_RETRIES => return Err(Error::SingularShiftedMatrix),
            _ => {
                g *= SHIFT_GROWTH;
                warnings.push(Warning::ShiftPerturbed { outer: 0, gamma: g });
            }
        }
    }
    Err(Error::SingularShiftedMatrix)
}

/// Doubling state `(E_k, X_k, Y_k)`.
#[derive(Clone, Debug)]
pub struct SdaState {
    pub e: Mat,
    pub x: SymMat,
    pub y: SymMat,
}

/// Initial doubling state for shift `γ < 0`. Returns the shift actually used.
pub fn sda_init(a: &Mat, g: &SymMat, h: &SymMat, gamma: f64) -> Result<(SdaState, f64, Vec<Warning>)> {
    let mut warnings = Vec::new();
    let (gamma, lu_p) = shifted_lu(a, gamma, &mut warnings)?;
    let st = sda_init_with(a, g, h, gamma, lu_p, &mut FactorTally::default())?;
    Ok((st, gamma, warnings))
}

/// `sda_init` for a fixed shift, recording its factorizations.
pub fn sda_init_tallied(a: &Mat, g: &SymMat, h: &SymMat, gamma: f64, tally: &mut FactorTally) -> Result<SdaState> {
    let lu_p = tally.factor(&a.add_diag(gamma)).map_err(|_| Error::SingularShiftedMatrix)?;
    sda_init_with(a, g, h, gamma, lu_p, tally)
}

fn sda_init_with(a: &Mat, g: &SymMat, h: &SymMat, gamma: f64, lu_p: Lu, tally: &mut FactorTally) -> Result<SdaState> {
    let n = a.rows();
    let am = a.add_diag(-gamma);
    let ap_inv_g = lu_p.solve(g)?;
    let h_ap_inv = lu_p.rdiv(h)?;
    // S = −A₊ᵀ − H A₊⁻¹ G
    let s = &-a.add_diag(gamma).transpose() - &(&h_ap_inv * g.as_mat());
    let lu_s = tally.factor(&s).map_err(|_| Error::SingularShiftedMatrix)?;
    let e = lu_s.solve_tr(&Mat::identity(n))?.scale(2.0 * gamma).add_diag(1.0);
    let x = lu_s.solve(&h_ap_inv)?.scale(2.0 * gamma);
    // Y₀ = A₊⁻¹G − A₊⁻¹G S⁻¹(−H A₊⁻¹ G − A₋ᵀ)
    let inner = &-(&h_ap_inv * g.as_mat()) - &am.transpose();
    let y = &ap_inv_g - &(&ap_inv_g * &lu_s.solve(&inner)?);
    Ok(SdaState { e, x: SymMat::symmetrize(&x), y: SymMat::symmetrize(&y) })
}

/// One doubling: `W = (I − Y X)⁻¹`, `E' = E W E`, `X' = X + Eᵀ X W E`,
/// `Y' = Y + E W Y Eᵀ`.
pub fn sda_step(s: &SdaState, step: usize) -> Result<SdaState> {
    let n = s.e.rows();
    let m = &Mat::identity(n) - &(s.y.as_mat() * s.x.as_mat());
    let lu = Lu::new(&m).map_err(|_| Error::DoublingBreakdown { step })?;
    let we = lu.solve(&s.e)?;
    let e = &s.e * &we;
    let x = s.x.as_mat() + &s.e.tr_mul(&(s.x.as_mat() * &we));
    let wyet = lu.solve(&s.y.as_mat().mul_tr(&s.e))?;
    let y = s.y.as_mat() + &(&s.e * &wyet);
    if !e.is_finite() || !x.is_finite() || !y.is_finite() {
        return Err(Error::DoublingBreakdown { step });
    }
    Ok(SdaState { e, x: SymMat::symmetrize(&x), y: SymMat::symmetrize(&y) })
}

/// Solves `AᵀX + XA − XGX + H = 0` for the stabilizing solution.
pub fn solve_care(a: &Mat, g: &SymMat, h: &SymMat, cfg: &SdaConfig) -> Result<SdaOutcome> {
    let n = a.rows();
    if g.n() != n || h.n() != n || !a.is_square() {
        return Err(Error::DimensionMismatch("CARE coefficients".into()));
    }
    let h_norm = h.norm_fro();
    if h_norm == 0.0 {
        return Ok(SdaOutcome {
            x: SymMat::zeros(n),
            iterations: 0,
            gamma: cfg.gamma.unwrap_or(-1.0),
            residual_norm: 0.0,
            warnings: Vec::new(),
            iterates: Vec::new(),
        });
    }
    let mut warnings = Vec::new();
    let gamma = match cfg.gamma {
        Some(gm) => gm,
        None => {
            let sh = select_shift(a, g, h)?;
            if sh.degenerate {
                warnings.push(Warning::DegenerateShift { outer: 0, gamma: sh.gamma });
            }
            sh.gamma
        }
    };
    let (mut st, gamma, w) = sda_init(a, g, h, gamma)?;
    warnings.extend(w);
    let target = cfg.stop.target(h_norm);
    let mut iterates = Vec::new();
    let mut iterations = 1;
    loop {
        if cfg.record {
            iterates.push(st.x.clone());
        }
        let res = care_residual(a, g, h, &st.x).norm_fro();
        if res <= target {
            return Ok(SdaOutcome { x: st.x, iterations, gamma, residual_norm: res, warnings, iterates });
        }
        if iterations > cfg.max_doublings {
            return Err(Error::MaxIterationsExceeded(None));
        }
        st = sda_step(&st, iterations)?;
        iterations += 1;
    }
}

/// Smith iterate `(E_k, X_k)` for `AᵀX + XA + H = 0`.
#[derive(Clone, Debug)]
pub struct SmithState {
    pub e: Mat,
    pub x: SymMat,
}

/// `E₀ = I − 2γ A₊⁻¹`, `X₀ = −2γ A₊⁻ᵀ H A₊⁻¹`.
pub fn smith_init(a: &Mat, h: &SymMat, gamma: f64) -> Result<(SmithState, f64, Vec<Warning>)> {
    let mut warnings = Vec::new();
    let (gamma, lu) = shifted_lu(a, gamma, &mut warnings)?;
    let e = lu.inverse().scale(-2.0 * gamma).add_diag(1.0);
    let x = lu.solve_tr(&lu.rdiv(h)?)?.scale(-2.0 * gamma);
    Ok((SmithState { e, x: SymMat::symmetrize(&x) }, gamma, warnings))
}

/// `E' = E²`, `X' = X + EᵀXE`.
pub fn smith_step(s: &SmithState) -> SmithState {
    let x = s.x.as_mat() + &s.e.tr_mul(&(s.x.as_mat() * &s.e));
    SmithState { e: &s.e * &s.e, x: SymMat::symmetrize(&x) }
}

pub fn lyapunov_residual(a: &Mat, h: &SymMat, x: &SymMat) -> SymMat {
    let xa = x.as_mat() * a;
    SymMat::symmetrize(&(&(&xa.transpose() + &xa) + h.as_mat()))
}

/// Solves `AᵀX + XA + H = 0` for stable `A` by the Smith iteration.
pub fn solve_lyapunov_smith(a: &Mat, h: &SymMat, cfg: &SdaConfig) -> Result<SdaOutcome> {
    let n = a.rows();
    if h.n() != n || !a.is_square() {
        return Err(Error::DimensionMismatch("Lyapunov coefficients".into()));
    }
    let h_norm = h.norm_fro();
    if h_norm == 0.0 {
        return Ok(SdaOutcome {
            x: SymMat::zeros(n),
            iterations: 0,
            gamma: cfg.gamma.unwrap_or(-1.0),
            residual_norm: 0.0,
            warnings: Vec::new(),
            iterates: Vec::new(),
        });
    }
    let mut warnings = Vec::new();
    let gamma = match cfg.gamma {
        Some(g) => g,
        None => {
            let sh = lyapunov_shift(a)?;
            if sh.degenerate {
                warnings.push(Warning::DegenerateShift { outer: 0, gamma: sh.gamma });
            }
            sh.gamma
        }
    };
    let (mut st, gamma, w) = smith_init(a, h, gamma)?;
    warnings.extend(w);
    let target = cfg.stop.target(h_norm);
    let mut iterates = Vec::new();
    let mut iterations = 1;
    loop {
        if cfg.record {
            iterates.push(st.x.clone());
        }
        let res = lyapunov_residual(a, h, &st.x).norm_fro();
        if res <= target {
            return Ok(SdaOutcome { x: st.x, iterations, gamma, residual_norm: res, warnings, iterates });
        }
        if iterations > cfg.max_doublings || !st.x.is_finite() {
            return Err(Error::MaxIterationsExceeded(None));
        }
        st = smith_step(&st);
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn scalar_care() {
        // 2ax − g x² + h = 0  →  x = (a + √(a² + gh))/g
        let (a, g, h) = (0.3, 2.0, 1.5);
        let cfg = SdaConfig { stop: StopRule::Absolute(1e-15), ..Default::default() };
        let out = solve_care(&m(&[&[a]]), &SymMat::diag(&[g]), &SymMat::diag(&[h]), &cfg).unwrap();
        let exact = (a + (a * a + g * h).sqrt()) / g;
        assert!((out.x[(0, 0)] - exact).abs() < 1e-14);
    }

    #[test]
    fn zero_constant_term_gives_zero_solution() {
        let a = m(&[&[-1.0, 2.0], &[0.0, -3.0]]);
        let out = solve_care(&a, &SymMat::identity(2), &SymMat::zeros(2), &SdaConfig::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x.max_abs(), 0.0);
    }

    #[test]
    fn smith_one_step_exact_for_scalar() {
        // A = −1, H = 2, γ = −1 → X₀ = 1 solves −2x + 2 = 0
        let cfg = SdaConfig { gamma: Some(-1.0), stop: StopRule::Absolute(0.0), ..Default::default() };
        let out = solve_lyapunov_smith(&m(&[&[-1.0]]), &SymMat::diag(&[2.0]), &cfg).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x[(0, 0)], 1.0);
    }

    #[test]
    fn rectangle_rule_branches() {
        // c² ≥ b(a−b)/2
        assert!((rectangle_shift(-2.0, -1.0, 3.0) + 10f64.sqrt()).abs() < 1e-15);
        // c = 0, a ≪ b: −√(ab)
        assert!((rectangle_shift(-16.0, -1.0, 0.0) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum_falls_back() {
        let a = m(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let s = select_shift(&a, &SymMat::zeros(2), &SymMat::zeros(2));
        match s {
            Ok(sh) => assert!(sh.degenerate && sh.gamma < 0.0),
            Err(e) => assert!(matches!(e, Error::NoStableEigenvalues)),
        }
    }
}
