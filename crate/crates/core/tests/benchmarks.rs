mod common;

use common::*;
use scare_core::benchmarks::*;
use scare_core::matlib::*;

fn m(rows: &[&[f64]]) -> Mat {
    Mat::from_rows(rows).unwrap()
}

#[test]
fn ex5_1_listing() {
    let p = ex5_1();
    assert_eq!(*p.a(), m(&[&[0.9512, 0.0], &[0.0, 0.9048]]));
    assert_eq!(*p.b(), m(&[&[4.8770, 4.8770], &[-1.1895, 3.5690]]));
    assert_eq!(*p.q().as_mat(), m(&[&[0.005, 0.0], &[0.0, 0.020]]));
    assert_eq!(*p.r().as_mat(), Mat::diag(&[1.0 / 3.0, 3.0]));
    assert_eq!(p.l().max_abs(), 0.0);
    assert_eq!(p.noise_terms(), 3);
    assert_eq!(p.a0()[1], m(&[&[1.0, -0.1], &[0.5, 0.0]]));
    assert_eq!(p.b0()[2], m(&[&[1.0, -1.0], &[-0.2, 1.0]]));
}

#[test]
fn ex5_2_listing() {
    let e = 0.01;
    let p = ex5_2(e);
    let third = |v: f64| v / 3.0 * e;
    assert_eq!(p.a()[(0, 0)], third(7.0));
    assert_eq!(p.a()[(1, 2)], -third(2.0));
    assert_eq!(p.a()[(0, 2)], 0.0);
    assert!(rel_mat(p.b(), &Mat::identity(3).scale(10.0)) < 1e-15);
    let q = p.q();
    assert!((q[(0, 0)] - (4.0 * e + 4.0 + 1.0 / e) / 9.0).abs() < 1e-13);
    assert!((q[(1, 1)] - (1.0 + 4.0 * e + 4.0 / e) / 9.0).abs() < 1e-13);
    assert!((q[(1, 2)] - 2.0 * (-1.0 - e + 2.0 / e) / 9.0).abs() < 1e-13);
    assert!((p.a0()[0][(2, 2)] - 0.03).abs() < 1e-16);
    assert!((p.b0()[0][(2, 1)] + 0.095).abs() < 1e-16);
    assert_eq!(p.noise_terms(), 1);
}

#[test]
fn ex5_3_listing() {
    let p = ex5_3();
    assert_eq!(*p.q().as_mat(), m(&[&[0.0028, -0.0013], &[-0.0013, 0.0190]]));
    assert!(rel_mat(&p.a0()[0], &m(&[&[0.65, 1.3], &[1.3, 0.65]])) < 1e-15);
    assert_eq!(p.b0()[0], Mat::identity(2).scale(6.5));
}

#[test]
fn ex5_4_listing() {
    let p = ex5_4(5.0);
    assert_eq!(*p.a(), m(&[&[-2.0, 1.0], &[4.0, -3.0]]));
    assert_eq!(*p.q().as_mat(), m(&[&[9.0, 5.0], &[5.0, 8.0]]));
    assert_eq!(*p.b(), m(&[&[1.0], &[1.0]]));
    assert_eq!(p.b0()[0], m(&[&[0.1], &[0.0]]));
}

#[test]
fn vehicle_string_structure() {
    let p = build(Case::Ex5_5);
    assert_eq!((p.n(), p.m(), p.noise_terms()), (199, 100, 5));
    let a = p.a();
    for i in 0..199 {
        for j in 0..199 {
            // block bidiagonal: E = [[-1,0],[1,0]] on the diagonal, F = [[0,0],[-1,0]] after it
            let want = match (i % 2, j as isize - i as isize) {
                (0, 0) => -1.0,
                (1, -1) => 1.0,
                (1, 1) => -1.0,
                _ => 0.0,
            };
            assert_eq!(a[(i, j)], want, "({i},{j})");
        }
    }
    for i in 0..199 {
        assert_eq!(p.q()[(i, i)], if i % 2 == 1 { 10.0 } else { 0.0 });
        for j in 0..100 {
            assert_eq!(p.b()[(i, j)], if i % 2 == 0 && j == i / 2 { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn seeded_dimensions() {
    for (c, n, mm, r) in [(Case::Ex5_6, 5, 2, 4), (Case::Ex5_7, 6, 4, 3), (Case::Ex5_8, 9, 4, 3)] {
        let p = build(c);
        assert_eq!((p.n(), p.m(), p.noise_terms()), (n, mm, r), "{}", c.name());
    }
}

#[test]
fn noise_is_rescaled_exactly() {
    for c in [Case::Ex5_5, Case::Ex5_6, Case::Ex5_7, Case::Ex5_8] {
        let p = build(c);
        let (sa, sb) = c.noise().unwrap();
        let (na, nb) = (p.a().norm_inf(), p.b().norm_inf());
        for (i, (a0, b0)) in p.a0().iter().zip(p.b0()).enumerate() {
            let k = (i + 1) as f64;
            let want_a = sa.coeff * k * na;
            let want_b = sb.coeff * k * nb;
            assert!((a0.norm_inf() - want_a).abs() <= 1e-13 * want_a, "{}", c.name());
            assert!((b0.norm_inf() - want_b).abs() <= 1e-13 * want_b, "{}", c.name());
        }
    }
    let (sa, sb) = Case::Ex5_5.noise().unwrap();
    assert_eq!((sa.coeff, sa.power_step, sb.coeff, sb.power_step), (0.1, 8, 0.15, 3));
}

#[test]
fn wgn_variance() {
    let w = wgn(100, 100, 0.0, 42);
    let xs = w.as_slice();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    assert!((0.9..=1.1).contains(&var), "{var}");
    let w = wgn(100, 100, 20.0, 42);
    let var = w.as_slice().iter().map(|x| x * x).sum::<f64>() / 1e4;
    assert!((90.0..=110.0).contains(&var), "{var}");
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(wgn(7, 3, 8.0, 11), wgn(7, 3, 8.0, 11));
    assert_ne!(wgn(7, 3, 8.0, 11), wgn(7, 3, 8.0, 12));
    for c in Case::ALL {
        let (p, q) = (build(c), build(c));
        assert_eq!(p.a0(), q.a0());
        assert_eq!(p.b0(), q.b0());
    }
    let other = build_seeded(Case::Ex5_6, Case::Ex5_6.default_seed() + 1);
    assert_ne!(other.a0()[0], build(Case::Ex5_6).a0()[0]);
    assert_eq!(noise_seed(3, 8, 2), 3016);
}

#[test]
fn case_names_round_trip() {
    for c in Case::ALL {
        assert_eq!(Case::parse(c.name()), Some(c));
        assert_eq!(c.reference().is_some(), !c.is_seeded());
    }
    assert_eq!(Case::parse("ex9"), None);
}

#[test]
fn scalar_root_closed_form() {
    assert!((scalar_root(-1.0, 1.0, 1.0) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    let p = scalar(2.0, 1.0, 0.0);
    assert_eq!(p.n(), 1);
    assert_eq!(scalar_root(2.0, 1.0, 0.0), 4.0);
}
