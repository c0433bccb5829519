//! Test problems: four deterministic small examples, four examples with
//! seeded random noise matrices, a scalar problem with a closed-form root
//! and a generator of random well-posed instances.
//!
//! Random matrices come from `ChaCha20Rng::seed_from_u64(seed)`; standard
//! normals are drawn in row-major order by Box–Muller on pairs of 53-bit
//! uniforms `u ∈ (0, 1]`, using both the cosine and the sine output. For
//! noise term `i` of a case with base seed `s`, the seed is
//! `1000·s + k·i` where `k` is the per-case power multiplier listed in
//! [`Case::noise`].

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matlib::{spectral_abscissa, Mat};
use crate::scare_model::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    Ex5_1,
    Ex5_2,
    Ex5_3,
    Ex5_4,
    Ex5_5,
    Ex5_6,
    Ex5_7,
    Ex5_8,
}

/// Reference iteration counts for the small examples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub fpsda: (usize, usize),
    pub nt1: usize,
    pub nt2: (usize, usize),
    pub nt3: (usize, usize, usize),
    pub delta: f64,
    pub init: (usize, usize),
}

/// Scaling rule for one family of noise matrices: term `i` is a Gaussian
/// matrix rescaled to ∞-norm `coeff · i · ‖base‖∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub coeff: f64,
    /// Power in dBW is `power_step · i`; also the seed multiplier.
    pub power_step: u64,
}

impl Case {
    pub const ALL: [Case; 8] =
        [Case::Ex5_1, Case::Ex5_2, Case::Ex5_3, Case::Ex5_4, Case::Ex5_5, Case::Ex5_6, Case::Ex5_7, Case::Ex5_8];

    pub fn name(self) -> &'static str {
        match self {
            Case::Ex5_1 => "ex5_1",
            Case::Ex5_2 => "ex5_2",
            Case::Ex5_3 => "ex5_3",
            Case::Ex5_4 => "ex5_4",
            Case::Ex5_5 => "ex5_5",
            Case::Ex5_6 => "ex5_6",
            Case::Ex5_7 => "ex5_7",
            Case::Ex5_8 => "ex5_8",
        }
    }

    pub fn parse(s: &str) -> Option<Case> {
        Case::ALL.iter().copied().find(|c| c.name() == s)
    }

    pub fn is_seeded(self) -> bool {
        matches!(self, Case::Ex5_5 | Case::Ex5_6 | Case::Ex5_7 | Case::Ex5_8)
    }

    /// Threshold on the normalized residual at which Newton takes over from
    /// the FP-SDA warm start.
    pub fn default_delta(self) -> f64 {
        match self {
            Case::Ex5_1 | Case::Ex5_2 | Case::Ex5_4 => 0.5,
            Case::Ex5_3 | Case::Ex5_5 | Case::Ex5_6 => 1e-2,
            Case::Ex5_7 | Case::Ex5_8 => 1e-3,
        }
    }

    /// Base seed pinned for the seeded cases.
    pub fn default_seed(self) -> u64 {
        0
    }

    /// `(A0 spec, B0 spec)` for the seeded cases.
    pub fn noise(self) -> Option<(NoiseSpec, NoiseSpec)> {
        let ns = |coeff, power_step| NoiseSpec { coeff, power_step };
        match self {
            Case::Ex5_5 => Some((ns(0.1, 8), ns(0.15, 3))),
            Case::Ex5_6 => Some((ns(0.2, 8), ns(0.1, 3))),
            Case::Ex5_7 => Some((ns(0.012, 100), ns(0.012, 40))),
            Case::Ex5_8 => Some((ns(0.025, 10), ns(0.01, 4))),
            _ => None,
        }
    }

    pub fn reference(self) -> Option<ReferenceRow> {
        let row = |fpsda, nt1, nt2, nt3, delta, init| ReferenceRow { fpsda, nt1, nt2, nt3, delta, init };
        match self {
            Case::Ex5_1 => Some(row((19, 21), 6, (6, 23), (6, 28, 28), 0.5, (1, 2))),
            Case::Ex5_2 => Some(row((10, 41), 3, (3, 8), (3, 11, 11), 0.5, (1, 5))),
            Case::Ex5_3 => Some(row((23, 24), 5, (5, 30), (5, 30, 30), 1e-2, (4, 5))),
            Case::Ex5_4 => Some(row((8, 8), 3, (3, 8), (3, 10, 10), 0.5, (1, 1))),
            _ => None,
        }
    }
}

fn m(rows: &[&[f64]]) -> Mat {
    Mat::from_rows(rows).expect("literal matrix")
}

fn problem(a: Mat, b: Mat, q: Mat, r: Mat, a0: Vec<Mat>, b0: Vec<Mat>) -> Problem {
    let l = Mat::zeros(b.rows(), b.cols());
    Problem::new(a, b, q, l, r, a0, b0).expect("benchmark data is valid")
}

/// Builds a case, using the pinned seed for the seeded ones.
pub fn build(case: Case) -> Problem {
    build_seeded(case, case.default_seed())
}

/// Builds a case with base seed `seed` (ignored by the deterministic cases).
pub fn build_seeded(case: Case, seed: u64) -> Problem {
    match case {
        Case::Ex5_1 => ex5_1(),
        Case::Ex5_2 => ex5_2(0.01),
        Case::Ex5_3 => ex5_3(),
        Case::Ex5_4 => ex5_4(5.0),
        Case::Ex5_5 => seeded(case, vehicle_string(100), seed),
        Case::Ex5_6 => seeded(case, missile(), seed),
        Case::Ex5_7 => seeded(case, f16(), seed),
        Case::Ex5_8 => seeded(case, quadrotor(), seed),
    }
}

fn ex5_1_ab() -> (Mat, Mat) {
    (m(&[&[0.9512, 0.0], &[0.0, 0.9048]]), m(&[&[4.8770, 4.8770], &[-1.1895, 3.5690]]))
}

pub fn ex5_1() -> Problem {
    let (a, b) = ex5_1_ab();
    let q = m(&[&[0.005, 0.0], &[0.0, 0.020]]);
    let r = m(&[&[1.0 / 3.0, 0.0], &[0.0, 3.0]]);
    let a0 = alloc::vec![
        m(&[&[-0.1, 0.1], &[-0.2, 0.2]]),
        m(&[&[1.0, -0.1], &[0.5, 0.0]]),
        m(&[&[0.0, -0.2], &[0.2, 0.5]]),
    ];
    let b0 = alloc::vec![
        m(&[&[0.0, -0.1], &[0.1, 0.0]]),
        m(&[&[0.5, 1.0], &[-0.1, 0.2]]),
        m(&[&[1.0, -1.0], &[-0.2, 1.0]]),
    ];
    problem(a, b, q, r, a0, b0)
}

pub fn ex5_2(eps: f64) -> Problem {
    let a = m(&[&[7.0 / 3.0, 2.0 / 3.0, 0.0], &[2.0 / 3.0, 2.0, -2.0 / 3.0], &[0.0, -2.0 / 3.0, 5.0 / 3.0]]).scale(eps);
    let ie = 1.0 / eps;
    let q11 = (4.0 * eps + 4.0 + ie) / 9.0;
    let q12 = 2.0 * (2.0 * eps - 1.0 - ie) / 9.0;
    let q13 = 2.0 * (2.0 - eps - ie) / 9.0;
    let q22 = (1.0 + 4.0 * eps + 4.0 * ie) / 9.0;
    let q23 = 2.0 * (-1.0 - eps + 2.0 * ie) / 9.0;
    let q33 = (4.0 + eps + 4.0 * ie) / 9.0;
    let q = m(&[&[q11, q12, q13], &[q12, q22, q23], &[q13, q23, q33]]);
    let b = Mat::identity(3).scale(1.0 / eps.sqrt());
    let a0 = m(&[&[0.1, -0.1, 0.01], &[-0.2, 0.1, -0.1], &[0.05, -0.01, 0.3]]).scale(0.1);
    let b0 = m(&[&[0.0, 0.0, 0.2], &[0.36, -0.6, 0.0], &[0.0, -0.95, -0.032]]).scale(0.1);
    problem(a, b, q, Mat::identity(3), alloc::vec![a0], alloc::vec![b0])
}

pub fn ex5_3() -> Problem {
    let (a, b) = ex5_1_ab();
    let q = m(&[&[0.0028, -0.0013], &[-0.0013, 0.0190]]);
    let r = m(&[&[1.0 / 3.0, 0.0], &[0.0, 3.0]]);
    let a0 = m(&[&[0.1, 0.2], &[0.2, 0.1]]).scale(6.5);
    let b0 = Mat::identity(2).scale(6.5);
    problem(a, b, q, r, alloc::vec![a0], alloc::vec![b0])
}

pub fn ex5_4(eps: f64) -> Problem {
    let a = m(&[&[3.0 - eps, 1.0], &[4.0, 2.0 - eps]]);
    let b = m(&[&[1.0], &[1.0]]);
    let q = m(&[&[4.0 * eps - 11.0, 2.0 * eps - 5.0], &[2.0 * eps - 5.0, 2.0 * eps - 2.0]]);
    let a0 = m(&[&[0.1, -0.1], &[-0.2, 0.1]]);
    let b0 = m(&[&[0.1], &[0.0]]);
    problem(a, b, q, Mat::identity(1), alloc::vec![a0], alloc::vec![b0])
}

/// Deterministic part of a seeded case: `(A, B, Q, R, r)`.
pub struct Plant {
    pub a: Mat,
    pub b: Mat,
    pub q: Mat,
    pub r: Mat,
    pub terms: usize,
}

/// String of `m` vehicles: states alternate velocities and gaps, `n = 2m − 1`.
pub fn vehicle_string(mv: usize) -> Plant {
    let n = 2 * mv - 1;
    let mut a = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, mv);
    let mut q = Mat::zeros(n, n);
    for i in 0..n {
        if i % 2 == 0 {
            a[(i, i)] = -1.0;
            b[(i, i / 2)] = 1.0;
        } else {
            a[(i, i - 1)] = 1.0;
            a[(i, i + 1)] = -1.0;
            q[(i, i)] = 10.0;
        }
    }
    Plant { a, b, q, r: Mat::identity(mv), terms: 5 }
}

pub fn missile() -> Plant {
    let a = m(&[
        &[0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0696, 0.0, -0.0307, -1.91e-4],
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.123, 0.0, 0.0696, 6.13e-4],
        &[0.0, 0.0, 0.0, 0.0, -0.1],
    ]);
    let b = m(&[&[0.0, 0.0], &[-9.13e-5, 0.0], &[0.0, 0.0], &[2.42e-5, -1.30e-4], &[0.0, 0.0]]);
    let q = Mat::diag(&[1000.0, 1000.0, 1000.0, 1000.0, 0.0]);
    Plant { a, b, q, r: Mat::identity(2), terms: 4 }
}

pub fn f16() -> Plant {
    let a = m(&[
        &[3.958e-5, 0.0, 0.0, 0.0, -5.866, -6.985],
        &[2.116e-4, 0.0, 0.0, 5.866, 0.0, -84.66],
        &[-0.1158, 0.0, 0.0, 6.985, 84.66, 0.0],
        &[0.0, 0.0, 0.0, 1.791e-4, 4.303e-3, -5.006e-3],
        &[0.0, 0.0, 0.0, -5.329e-3, 0.0, -4.259e-2],
        &[0.0, 0.0, 0.0, -4.769e-3, 3.253e-2, -1.791e-4],
    ]);
    let mut b = Mat::zeros(6, 4);
    b[(0, 0)] = 1.076e-4;
    b[(3, 1)] = 7.780e-5;
    b[(3, 3)] = 7.780e-5;
    b[(4, 0)] = 3.964e-6;
    b[(4, 2)] = 1.321e-5;
    b[(5, 1)] = 1.211e-6;
    b[(5, 3)] = 1.171e-5;
    Plant { a, b, q: Mat::identity(6).scale(5000.0), r: Mat::identity(4).scale(2e-4), terms: 3 }
}

pub fn quadrotor() -> Plant {
    let a = m(&[
        &[0.0, -8.208e-4, -1.047e-2, 0.0, -1.234e-4, 1.178, 0.0, -9.8, 0.0],
        &[8.208e-4, 0.0, -1.603e-3, 1.234e-4, 0.0, 2.203e-2, 9.800, -5.436e-4, 0.0],
        &[1.047e-2, 1.603e-3, 0.0, -1.178, -2.203e-2, 0.0, 0.0, 0.0, 9.820e-1],
        &[0.0, 0.0, 0.0, 0.0, 7.738e-4, -9.871e-3, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, -7.738e-4, 0.0, -1.511e-3, 0.0, 0.0, 0.0],
        &[0.0; 9],
        &[0.0, 0.0, 0.0, 1.000, 1.386e-8, 2.499e-4, 2.617e-6, -5.464e-4, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.000, 0.0, -9.650e-3, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.100],
    ]);
    let (mu, ix, iy, iz) = (1.0, 0.01466, 0.01466, 0.02848);
    let mut b = Mat::zeros(9, 4);
    b[(2, 0)] = -1.0 / mu;
    b[(3, 1)] = 1.0 / ix;
    b[(4, 2)] = 1.0 / iy;
    b[(5, 3)] = 1.0 / iz;
    let q = Mat::diag(&[2000.0, 2000.0, 3000.0, 10.0, 10.0, 100.0, 0.0, 0.0, 0.0]);
    Plant { a, b, q, r: Mat::identity(4), terms: 3 }
}

/// Seed of noise term `i` (1-based) for base seed `s`.
pub fn noise_seed(base: u64, power_step: u64, i: usize) -> u64 {
    base.wrapping_mul(1000).wrapping_add(power_step * i as u64)
}

fn seeded(case: Case, plant: Plant, seed: u64) -> Problem {
    let (sa, sb) = case.noise().expect("seeded case");
    let (n, mm) = (plant.a.rows(), plant.b.cols());
    let (na, nb) = (plant.a.norm_inf(), plant.b.norm_inf());
    let mut a0 = Vec::with_capacity(plant.terms);
    let mut b0 = Vec::with_capacity(plant.terms);
    for i in 1..=plant.terms {
        let fi = i as f64;
        let ga = wgn(n, n, (sa.power_step * i as u64) as f64, noise_seed(seed, sa.power_step, i));
        let gb = wgn(n, mm, (sb.power_step * i as u64) as f64, noise_seed(seed, sb.power_step, i));
        a0.push(ga.scale(sa.coeff * fi * na / ga.norm_inf()));
        b0.push(gb.scale(sb.coeff * fi * nb / gb.norm_inf()));
    }
    problem(plant.a, plant.b, plant.q, plant.r, a0, b0)
}

/// Standard normal stream described in the module docs.
pub struct Gaussian {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Gaussian { rng: ChaCha20Rng::seed_from_u64(seed), spare: None }
    }

    fn uniform(&mut self) -> f64 {
        // (0, 1]
        1.0 - (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let rad = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(rad * th.sin());
        rad * th.cos()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |_, _| self.next())
    }
}

/// White Gaussian noise matrix with power `power_dbw` dBW, i.e. variance
/// `10^(power_dbw/10)`.
pub fn wgn(rows: usize, cols: usize, power_dbw: f64, seed: u64) -> Mat {
    let sd = 10f64.powf(power_dbw / 20.0);
    Gaussian::new(seed).matrix(rows, cols).scale(sd)
}

/// Scalar problem `2ax + h − g x² = 0` with no noise terms. Its stabilizing
/// root is `(a + √(a² + gh))/g`.
pub fn scalar(a: f64, g: f64, h: f64) -> Problem {
    Problem::new(
        Mat::diag(&[a]),
        Mat::diag(&[g.sqrt()]),
        Mat::diag(&[h]),
        Mat::zeros(1, 1),
        Mat::identity(1),
        Vec::new(),
        Vec::new(),
    )
    .expect("scalar problem")
}

pub fn scalar_root(a: f64, g: f64, h: f64) -> f64 {
    (a + (a * a + g * h).sqrt()) / g
}

/// Random instance with positive definite `Q` and `R`, a small cross term
/// `L` keeping `[[Q, L], [Lᵀ, R]]` positive definite, and noise of relative
/// size `noise`. `A` is shifted so its spectral abscissa is at most −1/2,
/// which keeps moderate noise (up to about 0.3) inside the feasible region.
pub fn random_instance(seed: u64, n: usize, mm: usize, terms: usize, noise: f64) -> Problem {
    let mut g = Gaussian::new(seed);
    let sn = 1.0 / (n as f64).sqrt();
    let mut a = g.matrix(n, n).scale(sn);
    let top = spectral_abscissa(&a).expect("eigenvalues");
    if top > -0.5 {
        a = a.add_diag(-0.5 - top);
    }
    let b = g.matrix(n, mm).scale(sn);
    let c = g.matrix(n, n).scale(sn);
    let q = c.tr_mul(&c).add_diag(1.0);
    let d = g.matrix(mm, mm).scale(0.5 / (mm as f64).sqrt());
    let r = d.tr_mul(&d).add_diag(1.0);
    let l = g.matrix(n, mm).scale(0.2 * sn);
    let mut a0 = Vec::with_capacity(terms);
    let mut b0 = Vec::with_capacity(terms);
    for _ in 0..terms {
        a0.push(g.matrix(n, n).scale(noise * sn));
        b0.push(g.matrix(n, mm).scale(noise * sn));
    }
    Problem::new(a, b, q, l, r, a0, b0).expect("random instance")
}
