//! Dense row-major matrices, LU with partial pivoting, Kronecker helpers,
//! norms and thin wrappers over the nalgebra eigensolvers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Deref, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

pub use nalgebra::Complex;
pub type C64 = Complex<f64>;

/// Dimension above which the exact 2-norm is replaced by an estimate in
/// [`Norm2Mode::Auto`].
pub const EXACT_NORM2_MAX_DIM: usize = 512;

/// Relative tolerance used by [`SymMat::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative pivot threshold below which a factorization reports singularity.
pub const SING_TOL: f64 = 1e-14;

#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl core::fmt::Debug for Mat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "{:>13.6e} ", v)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Mat { rows, cols, data: data.to_vec() })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nr * nc);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != nc {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    nc
                )));
            }
            data.extend_from_slice(r);
        }
        Mat::from_row_slice(nr, nc, &data)
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s I`.
    pub fn add_diag(&self, s: f64) -> Mat {
        assert!(self.is_square(), "add_diag on a non-square matrix");
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += s;
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    fn check_same(&self, o: &Mat, op: &str) -> Result<()> {
        if self.shape() != o.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}: {}x{} vs {}x{}",
                op, self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Mat) -> Result<Mat> {
        self.check_same(o, "add")?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, o: &Mat) -> Result<Mat> {
        self.check_same(o, "sub")?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, o: &Mat) -> Result<Mat> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, o.cols);
        let nc = o.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * nc..(i + 1) * nc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &o.data[k * nc..(k + 1) * nc];
                for (x, b) in orow.iter_mut().zip(brow) {
                    *x += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ o`.
    pub fn tr_mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.rows, o.rows, "tr_mul dimension mismatch");
        let mut out = Mat::zeros(self.cols, o.cols);
        let nc = o.cols;
        for k in 0..self.rows {
            let brow = &o.data[k * nc..(k + 1) * nc];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * nc..(i + 1) * nc];
                for (x, b) in orow.iter_mut().zip(brow) {
                    *x += a * b;
                }
            }
        }
        out
    }

    /// `self oᵀ`.
    pub fn mul_tr(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.cols, "mul_tr dimension mismatch");
        Mat::from_fn(self.rows, o.rows, |i, j| {
            self.row(i).iter().zip(o.row(j)).map(|(a, b)| a * b).sum()
        })
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        Mat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn hstack(parts: &[&Mat]) -> Result<Mat> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[&Mat]) -> Result<Mat> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            out.set_block(r0, 0, p);
            r0 += p.rows;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_fro(&self) -> f64 {
        // scaled to avoid overflow on large entries
        let s = self.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        s * self.data.iter().map(|v| (v / s) * (v / s)).sum::<f64>().sqrt()
    }

    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn norm2_exact(&self) -> f64 {
        if self.max_abs() == 0.0 {
            return 0.0;
        }
        let m = to_na(self);
        match m.try_svd(false, false, f64::EPSILON, 10_000) {
            Some(svd) => svd.singular_values.iter().cloned().fold(0.0, f64::max),
            None => self.norm2_estimate(),
        }
    }

    /// `sqrt(‖M‖₁ ‖M‖∞)`, an upper bound on the 2-norm.
    pub fn norm2_estimate(&self) -> f64 {
        (self.norm_1() * self.norm_inf()).sqrt()
    }

    pub fn norm2(&self, mode: Norm2Mode) -> f64 {
        match mode {
            Norm2Mode::Exact => self.norm2_exact(),
            Norm2Mode::Estimate => self.norm2_estimate(),
            Norm2Mode::Auto => {
                if self.rows.max(self.cols) <= EXACT_NORM2_MAX_DIM {
                    self.norm2_exact()
                } else {
                    self.norm2_estimate()
                }
            }
        }
    }
}

/// How matrix 2-norms inside the normalized residual are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Norm2Mode {
    /// Exact up to [`EXACT_NORM2_MAX_DIM`], estimate above.
    #[default]
    Auto,
    Exact,
    Estimate,
}

impl Norm2Mode {
    pub fn name(self) -> &'static str {
        match self {
            Norm2Mode::Auto => "auto",
            Norm2Mode::Exact => "exact",
            Norm2Mode::Estimate => "estimate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(Norm2Mode::Auto),
            "exact" => Some(Norm2Mode::Exact),
            "estimate" => Some(Norm2Mode::Estimate),
            _ => None,
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operators panic on shape mismatch; the try_* methods return errors.
macro_rules! binop {
    ($tr:ident, $f:ident, $call:ident) => {
        impl $tr<&Mat> for &Mat {
            type Output = Mat;
            fn $f(self, o: &Mat) -> Mat {
                self.$call(o).expect(stringify!($f))
            }
        }
        impl $tr<Mat> for Mat {
            type Output = Mat;
            fn $f(self, o: Mat) -> Mat {
                (&self).$call(&o).expect(stringify!($f))
            }
        }
        impl $tr<&Mat> for Mat {
            type Output = Mat;
            fn $f(self, o: &Mat) -> Mat {
                (&self).$call(o).expect(stringify!($f))
            }
        }
        impl $tr<Mat> for &Mat {
            type Output = Mat;
            fn $f(self, o: Mat) -> Mat {
                self.$call(&o).expect(stringify!($f))
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, matmul);

impl Mul<f64> for &Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl AddAssign<&Mat> for Mat {
    fn add_assign(&mut self, o: &Mat) {
        self.check_same(o, "add_assign").expect("add_assign");
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Mat> for Mat {
    fn sub_assign(&mut self, o: &Mat) {
        self.check_same(o, "sub_assign").expect("sub_assign");
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a -= b;
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization.
pub fn vec_of(a: &Mat) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.rows * a.cols);
    for j in 0..a.cols {
        for i in 0..a.rows {
            v.push(a[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<Mat> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "unvec: {} entries for {}x{}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| v[j * rows + i]))
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl Lu {
    /// Factors `a`. A pivot below `SING_TOL·‖a‖∞` is treated as singular.
    pub fn new(a: &Mat) -> Result<Lu> {
        Lu::with_tol(a, SING_TOL)
    }

    pub fn with_tol(a: &Mat, sing_tol: f64) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows, a.cols
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tol = sing_tol * a.norm_inf();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tol || best == 0.0 {
                return Err(Error::Singular("lu"));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f == 0.0 {
                    continue;
                }
                let (top, bottom) = lu.split_at_mut(i * n);
                let krow = &top[k * n + k + 1..k * n + n];
                let irow = &mut bottom[k + 1..n];
                for (x, y) in irow.iter_mut().zip(krow) {
                    *x -= f * y;
                }
            }
        }
        if n == 0 {
            min_pivot = 1.0;
            max_pivot = 1.0;
        }
        Ok(Lu { n, lu, perm, min_pivot, max_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest over largest pivot magnitude.
    pub fn pivot_ratio(&self) -> f64 {
        self.min_pivot / self.max_pivot
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }

    fn solve_tr_in_place(&self, x: &mut [f64]) {
        // Aᵀ = Uᵀ Lᵀ P
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[k * n + i] * x[k];
            }
            x[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i] * x[k];
            }
            x[i] = s;
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch("LU solve rhs length".into()));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &Mat) -> Result<Mat> {
        if b.rows != self.n {
            return Err(Error::DimensionMismatch(format!(
                "LU solve: {}x{} system, rhs has {} rows",
                self.n, self.n, b.rows
            )));
        }
        let mut out = Mat::zeros(b.rows, b.cols);
        let mut col = vec![0.0; self.n];
        for j in 0..b.cols {
            for i in 0..self.n {
                col[i] = b[(self.perm[i], j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..self.n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// `A⁻ᵀ b`.
    pub fn solve_tr(&self, b: &Mat) -> Result<Mat> {
        if b.rows != self.n {
            return Err(Error::DimensionMismatch("LU transpose solve rhs rows".into()));
        }
        let mut out = Mat::zeros(b.rows, b.cols);
        let mut col = vec![0.0; self.n];
        for j in 0..b.cols {
            for i in 0..self.n {
                col[i] = b[(i, j)];
            }
            self.solve_tr_in_place(&mut col);
            for i in 0..self.n {
                out[(self.perm[i], j)] = col[i];
            }
        }
        Ok(out)
    }

    /// `b A⁻¹`.
    pub fn rdiv(&self, b: &Mat) -> Result<Mat> {
        Ok(self.solve_tr(&b.transpose())?.transpose())
    }

    pub fn inverse(&self) -> Mat {
        self.solve(&Mat::identity(self.n)).expect("square identity")
    }
}

/// Records the order of each LU factorization performed by an operator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorTally {
    pub sizes: Vec<usize>,
}

impl FactorTally {
    pub fn factor(&mut self, a: &Mat) -> Result<Lu> {
        let lu = Lu::new(a)?;
        self.sizes.push(a.rows());
        Ok(lu)
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn clear(&mut self) {
        self.sizes.clear();
    }
}

/// Solves `M Z = RHS`.
pub fn solve_linear(m: &Mat, rhs: &Mat) -> Result<Mat> {
    Lu::new(m)?.solve(rhs)
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    Ok(Lu::new(a)?.inverse())
}

/// Symmetric matrix. Construction through [`SymMat::new`] checks symmetry;
/// [`SymMat::symmetrize`] projects onto the symmetric part.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat(Mat);

impl SymMat {
    pub fn new(m: Mat) -> Result<SymMat> {
        SymMat::with_tol(m, SYMMETRY_TOL)
    }

    /// Accepts `m` when `‖M − Mᵀ‖_F ≤ tol·‖M‖_F`.
    pub fn with_tol(m: Mat, tol: f64) -> Result<SymMat> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let skew = (&m - &m.transpose()).norm_fro();
        if skew > tol * m.norm_fro() {
            return Err(Error::NotSymmetric);
        }
        Ok(SymMat::symmetrize(&m))
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrize(m: &Mat) -> SymMat {
        assert!(m.is_square(), "symmetrize on a non-square matrix");
        let n = m.rows;
        let mut s = m.clone();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        SymMat(s)
    }

    pub fn zeros(n: usize) -> SymMat {
        SymMat(Mat::zeros(n, n))
    }

    pub fn identity(n: usize) -> SymMat {
        SymMat(Mat::identity(n))
    }

    pub fn diag(d: &[f64]) -> SymMat {
        SymMat(Mat::diag(d))
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn eig(&self) -> Result<SymEig> {
        sym_eig(&self.0)
    }

    pub fn min_eig(&self) -> Result<f64> {
        Ok(self.eig()?.values.first().copied().unwrap_or(0.0))
    }

    /// Smallest eigenvalue is at least `-tol · max(1, ‖M‖₂)`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let e = self.eig()?;
        let top = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(e.values.first().map_or(true, |&v| v >= -tol * top.max(1.0)))
    }
}

impl Deref for SymMat {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

pub fn sym_eig(m: &Mat) -> Result<SymEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("sym_eig on a non-square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows;
    if n == 0 {
        return Ok(SymEig { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    if m.max_abs() == 0.0 {
        return Ok(SymEig { values: vec![0.0; n], vectors: Mat::identity(n) });
    }
    let e = nalgebra::SymmetricEigen::try_new(to_na(m), f64::EPSILON, eig_cap(n))
        .ok_or(Error::NoConvergence("symmetric eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    Ok(SymEig { values, vectors })
}

/// Iteration cap handed to the dense eigensolvers.
fn eig_cap(n: usize) -> usize {
    1000 * n.max(10)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &Mat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.max_abs() == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); m.rows]);
    }
    let s = nalgebra::linalg::Schur::try_new(to_na(m), f64::EPSILON, eig_cap(m.rows))
        .ok_or(Error::NoConvergence("eigensolver"))?;
    Ok(s.complex_eigenvalues().iter().cloned().collect())
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(m: &Mat) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(f64::NEG_INFINITY, |a, z| a.max(z.re)))
}

/// Complex Schur form `M = U T Uᴴ` with `T` upper triangular.
pub fn complex_schur(m: &Mat) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = m.rows;
    if m.max_abs() == 0.0 {
        return Ok((DMatrix::identity(n, n), DMatrix::zeros(n, n)));
    }
    let c = to_na(m).map(|v| C64::new(v, 0.0));
    let s = nalgebra::linalg::Schur::try_new(c, f64::EPSILON, eig_cap(n))
        .ok_or(Error::NoConvergence("complex Schur"))?;
    Ok(s.unpack())
}

pub fn to_na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

pub fn from_na(m: &DMatrix<f64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(&Mat::identity(2) * &a, a);
        assert_eq!(&a * &Mat::identity(3), a);
    }

    #[test]
    fn mismatched_product_is_an_error() {
        let a = Mat::zeros(2, 3);
        let b = Mat::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch(_))));
        assert!(matches!(a.try_add(&Mat::zeros(3, 2)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: [&[f64]; 2] = [&[1.0, 2.0], &[3.0]];
        assert!(matches!(Mat::from_rows(&rows), Err(Error::DimensionMismatch(_))));
        assert!(matches!(Mat::from_row_slice(1, 1, &[f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn tr_mul_and_mul_tr() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let b = m(&[&[1.0, -1.0], &[0.5, 2.0], &[0.0, 1.0]]);
        assert_eq!(a.tr_mul(&b), &a.transpose() * &b);
        assert_eq!(a.mul_tr(&b), &a * &b.transpose());
    }

    #[test]
    fn lu_solves_and_inverts() {
        let a = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let lu = Lu::new(&a).unwrap();
        let inv = lu.inverse();
        let e = &(&a * &inv) - &Mat::identity(3);
        assert!(e.max_abs() < 1e-14);
        let b = m(&[&[1.0, 0.0], &[2.0, 1.0], &[3.0, -1.0]]);
        let x = lu.solve_tr(&b).unwrap();
        assert!((&(&a.transpose() * &x) - &b).max_abs() < 1e-14);
        let y = lu.rdiv(&b.transpose()).unwrap();
        assert!((&(&y * &a) - &b.transpose()).max_abs() < 1e-14);
    }

    #[test]
    fn lu_detects_singularity() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(Lu::new(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn kron_vec_identity() {
        // vec(A X B) = (Bᵀ ⊗ A) vec(X)
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0], &[0.0, 1.0]]);
        let x = m(&[&[1.0, -1.0, 2.0], &[0.5, 0.0, 1.0]]);
        let b = m(&[&[2.0, 1.0], &[0.0, 1.0], &[1.0, 3.0]]);
        let lhs = vec_of(&(&(&a * &x) * &b));
        let k = kron(&b.transpose(), &a);
        let v = vec_of(&x);
        let rhs: Vec<f64> = (0..k.rows())
            .map(|i| k.row(i).iter().zip(&v).map(|(p, q)| p * q).sum())
            .collect();
        for (p, q) in lhs.iter().zip(&rhs) {
            assert!((p - q).abs() < 1e-13);
        }
        assert_eq!(unvec(&v, 2, 3).unwrap(), x);
    }

    #[test]
    fn norms() {
        let a = m(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert!((a.norm_fro() - 5.0).abs() < 1e-15);
        assert!((a.norm2_exact() - 4.0).abs() < 1e-14);
        assert_eq!(a.norm_1(), 4.0);
        assert_eq!(a.norm_inf(), 4.0);
        assert!(a.norm2_estimate() >= a.norm2_exact() - 1e-14);
    }

    #[test]
    fn symmetric_checks() {
        assert!(matches!(SymMat::new(m(&[&[1.0, 2.0], &[2.1, 1.0]])), Err(Error::NotSymmetric)));
        let s = SymMat::new(m(&[&[2.0, -1.0], &[-1.0, 2.0]])).unwrap();
        let e = s.eig().unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        assert!(s.is_psd(1e-10).unwrap());
        assert!(!SymMat::diag(&[1.0, -1e-3]).is_psd(1e-10).unwrap());
    }

    #[test]
    fn general_eigenvalues() {
        let a = m(&[&[0.0, 1.0], &[-2.0, -3.0]]);
        let mut ev: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-13 && (ev[1] + 1.0).abs() < 1e-13);
        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = eigenvalues(&rot).unwrap();
        assert!(ev.iter().all(|z| z.re.abs() < 1e-14 && (z.im.abs() - 1.0).abs() < 1e-14));
    }
}
