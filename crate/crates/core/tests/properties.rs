mod common;

use common::{min_eig, rel_mat, Rng};
use proptest::prelude::*;
use scare_core::benchmarks::{random_instance, scalar, scalar_root};
use scare_core::care_sda::{solve_care, SdaConfig, StopRule};
use scare_core::fixed_point::{kron_identity, perm_matrix, shuffle_perm, shuffle_perm_hat};
use scare_core::matlib::*;
use scare_core::newton::assemble;
use scare_core::report::Method;
use scare_core::scare_model::{frozen, omega, pi, residual};
use scare_core::solution_error;
use scare_core::solver::{solve, Options};

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn lu_round_trip(seed in any::<u64>(), n in 1usize..7) {
        let mut g = Rng::new(seed);
        let a = g.mat(n, n).add_diag(n as f64 + 1.0);
        let z = g.mat(n, 2);
        let back = solve_linear(&a, &(&a * &z)).unwrap();
        prop_assert!(rel_mat(&back, &z) < 1e-12);
    }

    #[test]
    fn norm2_between_bounds(seed in any::<u64>(), n in 1usize..8) {
        let a = Rng::new(seed).mat(n, n);
        let (two, est) = (a.norm2_exact(), a.norm2_estimate());
        prop_assert!(two <= est * (1.0 + 1e-12));
        prop_assert!(two * (1.0 + 1e-12) >= est / (n as f64).sqrt());
    }

    #[test]
    fn symmetrize_is_symmetric(seed in any::<u64>(), n in 1usize..6) {
        let s = Rng::new(seed).sym(n);
        prop_assert_eq!(s.as_mat().transpose(), s.as_mat().clone());
    }

    #[test]
    fn pi_is_monotone(seed in 0u64..10_000, n in 2usize..5, terms in 1usize..4) {
        let p = random_instance(seed, n, 2, terms, 0.4);
        let mut g = Rng::new(seed);
        let y = g.psd(n, 0.0);
        let x = SymMat::symmetrize(&(y.as_mat() + g.psd(n, 0.0).as_mat()));
        let (px, py) = (pi(&p, &x).unwrap(), pi(&p, &y).unwrap());
        let stack = |q: &scare_core::scare_model::Pi| {
            let mut s = Mat::zeros(n + 2, n + 2);
            s.set_block(0, 0, q.p11.as_mat());
            s.set_block(0, n, &q.p12);
            s.set_block(n, 0, &q.p12.transpose());
            s.set_block(n, n, q.p22.as_mat());
            s
        };
        let d = &stack(&px) - &stack(&py);
        prop_assert!(min_eig(&d) >= -1e-12 * d.norm_fro().max(1.0));
    }

    #[test]
    fn residual_sandwich(seed in 0u64..10_000, n in 2usize..5) {
        let p = random_instance(seed, n, 2, 2, 0.3);
        let x = Rng::new(seed).psd(n, 0.0);
        let fz = frozen(&p, &x).unwrap();
        let om = omega(&fz);
        let mut xm = Mat::zeros(2 * n, n);
        xm.set_block(0, 0, x.as_mat());
        xm.set_block(n, 0, &Mat::identity(n).scale(-1.0));
        let want = xm.tr_mul(&(om.as_mat() * &xm));
        prop_assert!(rel_mat(residual(&p, &x).unwrap().as_mat(), &want) < 1e-11);
    }

    #[test]
    fn kronecker_step_consistency(seed in 0u64..10_000, n in 2usize..5) {
        let p = random_instance(seed, n, 2, 2, 0.3);
        let mut g = Rng::new(seed);
        let asm = assemble(&p, &g.psd(n, 0.0)).unwrap();
        let (l, pm) = asm.kron_operators();
        let y = g.sym(n);
        let by = &(&l + &pm) * &Mat::from_row_slice(n * n, 1, &vec_of(&y)).unwrap();
        let lhs = &unvec(by.as_slice(), n, n).unwrap() + asm.m.as_mat();
        prop_assert!(rel_mat(&lhs, asm.step_residual(&y).as_mat()) < 1e-12);
    }

    #[test]
    fn permutations(seed in any::<u64>(), n in 1usize..5, r in 1usize..4) {
        let x = Rng::new(seed).sym(n);
        let x = x.as_mat();
        let p = perm_matrix(&shuffle_perm(n, r));
        prop_assert_eq!(p.tr_mul(&(&kron_identity(x, r) * &p)), kron(&Mat::identity(r), x));
        let ph = perm_matrix(&shuffle_perm_hat(n, r));
        let got = ph.tr_mul(&(&kron_identity(x, r + 1) * &ph));
        prop_assert_eq!(got.block(0, 0, n, n), x.clone());
        prop_assert_eq!(got.block(n, n, n * r, n * r), kron_identity(x, r));
    }

    #[test]
    fn scalar_care_root(a in -3.0f64..3.0, g in 0.2f64..4.0, h in 0.2f64..4.0) {
        let cfg = SdaConfig { stop: StopRule::Relative(1e-13), ..Default::default() };
        let out = solve_care(&Mat::diag(&[a]), &SymMat::diag(&[g]), &SymMat::diag(&[h]), &cfg).unwrap();
        let root = scalar_root(a, g, h);
        prop_assert!((out.x[(0, 0)] - root).abs() <= 1e-12 * root.max(1.0));
    }

    #[test]
    fn every_method_finds_scalar_root(a in -2.0f64..2.0, g in 0.5f64..2.0, h in 0.5f64..2.0) {
        let p = scalar(a, g, h);
        let root = scalar_root(a, g, h);
        for m in Method::ALL {
            let r = solve(&p, m, &Options::default()).unwrap();
            prop_assert!((r.x[(0, 0)] - root).abs() < 1e-12, "{} got {} want {}", m.name(), r.x[(0, 0)], root);
        }
    }

    #[test]
    fn solution_error_scales(seed in any::<u64>(), n in 1usize..5, c in 0.1f64..3.0) {
        let x = Rng::new(seed).psd(n, 0.5);
        let y = SymMat::symmetrize(&x.as_mat().scale(1.0 + c));
        prop_assert!((solution_error(&y, &x).unwrap() - c).abs() < 1e-12);
        prop_assert_eq!(solution_error(&x, &x).unwrap(), 0.0);
    }
}
