#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use scare_core::{Mat, SymMat};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on [-1, 1).
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn mat(&mut self, r: usize, c: usize) -> Mat {
        Mat::from_fn(r, c, |_, _| self.unit())
    }

    pub fn sym(&mut self, n: usize) -> SymMat {
        SymMat::symmetrize(&self.mat(n, n))
    }

    /// `GᵀG + shift·I`.
    pub fn psd(&mut self, n: usize, shift: f64) -> SymMat {
        let g = self.mat(n, n);
        SymMat::symmetrize(&g.tr_mul(&g).add_diag(shift))
    }

    /// Random matrix with spectrum shifted into the open left half-plane.
    pub fn stable(&mut self, n: usize) -> Mat {
        let a = self.mat(n, n);
        let s = a.norm_inf();
        a.add_diag(-(s + 0.5))
    }
}

// Reference arithmetic on nested vectors, deliberately naive.

pub type V = Vec<Vec<f64>>;

pub fn v(m: &Mat) -> V {
    m.to_rows()
}

pub fn mm(a: &V, b: &V) -> V {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for j in 0..p {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn tr(a: &V) -> V {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn add(a: &V, b: &V) -> V {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn sub(a: &V, b: &V) -> V {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn eye(n: usize) -> V {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Gauss–Jordan with full row search.
pub fn inv(a: &V) -> V {
    let n = a.len();
    let mut m: V = a.iter().zip(eye(n)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap()).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for x in m[c].iter_mut() {
            *x /= d;
        }
        for i in 0..n {
            if i != c {
                let f = m[i][c];
                let row = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(row) {
                    *x -= f * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn fro(a: &V) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel(a: &V, b: &V) -> f64 {
    fro(&sub(a, b)) / fro(b).max(1e-300)
}

pub fn rel_mat(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm_fro() / b.norm_fro().max(1e-300)
}

pub fn min_eig(m: &Mat) -> f64 {
    SymMat::symmetrize(m).min_eig().unwrap()
}
