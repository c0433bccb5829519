mod common;

use common::*;
use scare_core::benchmarks;
use scare_core::care_sda::*;
use scare_core::matlib::*;
use scare_core::scare_model::{care_residual, frozen};
use scare_core::Error;

fn s1(v: f64) -> SymMat {
    SymMat::diag(&[v])
}

fn kron_lyap(a: &Mat, h: &SymMat) -> Mat {
    let n = a.rows();
    let i = Mat::identity(n);
    let op = &kron(&i, &a.transpose()) + &kron(&a.transpose(), &i);
    let rhs = Mat::from_row_slice(n * n, 1, &vec_of(&-h.as_mat())).unwrap();
    let x = solve_linear(&op, &rhs).unwrap();
    unvec(x.as_slice(), n, n).unwrap()
}

#[test]
fn rectangle_rule_branches() {
    assert_eq!(rectangle_shift(-1.0, -1.0, 0.0), -1.0);
    assert_eq!(rectangle_shift(-4.0, -1.0, 0.0), -2.0);
    assert_eq!(rectangle_shift(-2.0, -1.0, 3.0), -(10f64).sqrt());
}

#[test]
fn select_shift_bounds_stable_half() {
    let a = Mat::diag(&[-1.0, -3.0]);
    let s = select_shift(&a, &SymMat::zeros(2), &SymMat::zeros(2)).unwrap();
    assert_eq!((s.a, s.b, s.c), (-3.0, -1.0, 0.0));
    assert!((s.gamma + 3f64.sqrt()).abs() < 1e-14);
    assert!(!s.degenerate);
}

#[test]
fn select_shift_degenerate_and_failure() {
    let a = Mat::diag(&[0.0, -1.0]);
    let s = select_shift(&a, &SymMat::zeros(2), &SymMat::zeros(2)).unwrap();
    assert!(s.degenerate);
    assert_eq!(s.gamma, -1e-8);
    let z = Mat::zeros(2, 2);
    assert!(matches!(
        select_shift(&z, &SymMat::zeros(2), &SymMat::zeros(2)),
        Err(Error::NoStableEigenvalues)
    ));
}

#[test]
fn sda_init_scalar_by_hand() {
    let (s, g, _) = sda_init(&Mat::diag(&[-1.0]), &s1(1.0), &s1(1.0), -1.0).unwrap();
    assert_eq!(g, -1.0);
    assert!((s.e[(0, 0)] - 0.2).abs() < 1e-15);
    assert!((s.x[(0, 0)] - 0.4).abs() < 1e-15);
    assert!((s.y[(0, 0)] + 0.4).abs() < 1e-15);
    let s1 = sda_step(&s, 0).unwrap();
    assert!((s1.x[(0, 0)] - (0.4 + 0.016 / 1.16)).abs() < 1e-15);
}

#[test]
fn sda_init_zero_data_matches_smith_start() {
    let mut g = Rng::new(1);
    let a = g.stable(3);
    let (s, gamma, _) = sda_init(&a, &SymMat::zeros(3), &SymMat::zeros(3), -1.5).unwrap();
    assert_eq!(s.x.max_abs() + s.y.max_abs(), 0.0);
    let (sm, _, _) = smith_init(&a, &SymMat::zeros(3), gamma).unwrap();
    assert!(rel_mat(&s.e, &sm.e.transpose()) < 1e-13 || rel_mat(&s.e, &sm.e) < 1e-13);
    let e = inverse(&a.add_diag(gamma)).unwrap().scale(-2.0 * gamma).add_diag(1.0);
    assert!(rel_mat(&sm.e, &e) < 1e-13);
}

#[test]
fn sda_step_with_zero_xy_squares_e() {
    let mut g = Rng::new(2);
    let e = g.mat(3, 3);
    let s = SdaState { e: e.clone(), x: SymMat::zeros(3), y: SymMat::zeros(3) };
    let t = sda_step(&s, 0).unwrap();
    assert!(rel_mat(&t.e, &(&e * &e)) < 1e-15);
    assert_eq!(t.x.max_abs() + t.y.max_abs(), 0.0);
}

#[test]
fn scalar_care_converges_to_root() {
    let cfg = SdaConfig { stop: StopRule::Absolute(1e-15), ..Default::default() };
    let out = solve_care(&Mat::diag(&[-1.0]), &s1(1.0), &s1(1.0), &cfg).unwrap();
    assert!((out.x[(0, 0)] - 0.41421356237).abs() < 1e-11);
    assert!((out.x[(0, 0)] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    assert!((-1.0 - out.x[(0, 0)] + 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn zero_constant_term_gives_zero_immediately() {
    let mut g = Rng::new(3);
    let a = g.mat(3, 3);
    let out = solve_care(&a, &g.psd(3, 0.1), &SymMat::zeros(3), &SdaConfig::default()).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.x.max_abs(), 0.0);
}

#[test]
fn decoupled_lyapunov() {
    let a = Mat::diag(&[-1.0, -2.0]);
    let h = SymMat::diag(&[2.0, 4.0]);
    let cfg = SdaConfig { stop: StopRule::Absolute(1e-14), ..Default::default() };
    let x = solve_care(&a, &SymMat::zeros(2), &h, &cfg).unwrap().x;
    assert!(rel_mat(&x, &Mat::identity(2)) < 1e-14);
    let x = solve_lyapunov_smith(&a, &h, &cfg).unwrap().x;
    assert!(rel_mat(&x, &Mat::identity(2)) < 1e-14);
}

#[test]
fn smith_scalar_exact() {
    let (s, _, _) = smith_init(&Mat::diag(&[-1.0]), &s1(2.0), -1.0).unwrap();
    assert_eq!(s.e[(0, 0)], 0.0);
    assert_eq!(s.x[(0, 0)], 1.0);
    let out = solve_lyapunov_smith(&Mat::diag(&[-1.0]), &s1(2.0), &SdaConfig { gamma: Some(-1.0), ..Default::default() }).unwrap();
    assert_eq!(out.iterations, 1);
    assert_eq!(out.x[(0, 0)], 1.0);
    let out = solve_lyapunov_smith(&Mat::diag(&[-1.0]), &SymMat::zeros(1), &SdaConfig::default()).unwrap();
    assert_eq!(out.x[(0, 0)], 0.0);
}

#[test]
fn smith_and_sda_against_kronecker() {
    let mut g = Rng::new(4);
    let cfg = SdaConfig { stop: StopRule::Relative(1e-15), ..Default::default() };
    for _ in 0..10 {
        let a = g.stable(4);
        let c = g.mat(2, 4);
        let h = SymMat::symmetrize(&c.tr_mul(&c));
        let want = kron_lyap(&a, &h);
        let sm = solve_lyapunov_smith(&a, &h, &cfg).unwrap().x;
        let sd = solve_care(&a, &SymMat::zeros(4), &h, &cfg).unwrap().x;
        assert!(rel_mat(&sm, &want) < 1e-11);
        assert!(rel_mat(&sd, &sm) < 1e-11);
    }
}

#[test]
fn inner_iterates_increase_monotonically() {
    let p = benchmarks::ex5_1();
    let mut g = Rng::new(5);
    for x in [SymMat::zeros(2), g.psd(2, 0.0)] {
        let fz = frozen(&p, &x).unwrap();
        let cfg = SdaConfig { stop: StopRule::Absolute(1e-14), record: true, ..Default::default() };
        let out = solve_care(&fz.ac, &fz.gc, &fz.hc, &cfg).unwrap();
        assert!(out.iterates.len() >= 2);
        let scale = out.x.norm2_exact().max(1.0);
        assert!(min_eig(&out.iterates[0]) >= -1e-11 * scale);
        for w in out.iterates.windows(2) {
            assert!(min_eig(&(w[1].as_mat() - w[0].as_mat())) >= -1e-11 * scale);
        }
        let closed = &fz.ac - &(fz.gc.as_mat() * out.x.as_mat());
        assert!(spectral_abscissa(&closed).unwrap() < 0.0);
        assert!(care_residual(&fz.ac, &fz.gc, &fz.hc, &out.x).norm_fro() <= 1e-13 * scale);
    }
}

#[test]
fn doubling_cap_is_reported() {
    let p = benchmarks::ex5_1();
    let fz = frozen(&p, &SymMat::zeros(2)).unwrap();
    let cfg = SdaConfig { stop: StopRule::Absolute(1e-300), max_doublings: 2, ..Default::default() };
    let r = solve_care(&fz.ac, &fz.gc, &fz.hc, &cfg);
    assert!(matches!(r, Err(Error::MaxIterationsExceeded(_))));
}
