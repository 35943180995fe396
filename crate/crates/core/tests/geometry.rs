mod common;

use std::f64::consts::PI;

use common::*;
use projcvm::geometry::*;
use projcvm::{AngleConfig, Error, QuadratureConfig, RandomStream};
use proptest::prelude::*;

fn cfg() -> AngleConfig<f64> {
    AngleConfig::default()
}

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rand_vec(d: usize, r: &mut RandomStream) -> Vec<f64> {
    (0..d).map(|_| r.gaussian()).collect()
}

#[test]
fn angle_examples() {
    let c = cfg();
    assert!((angle(&[1.0, 0.0], &[0.0, 1.0], &c).unwrap() - PI / 2.0).abs() <= 1e-15);
    assert_eq!(angle(&[1.0, 0.0], &[1.0, 0.0], &c).unwrap(), 0.0);
    assert!((angle(&[1.0, 0.0], &[-1.0, 0.0], &c).unwrap() - PI).abs() <= 1e-15);
    assert!((angle(&[1.0, 0.0], &[1.0, 1.0], &c).unwrap() - PI / 4.0).abs() <= 1e-15);
    assert_eq!(angle(&[0.0, 0.0], &[1.0, 1.0], &c).unwrap_err(), Error::ZeroVector);
    assert_eq!(angle(&[1e-13, 0.0], &[1.0, 1.0], &c).unwrap_err(), Error::ZeroVector);
    assert!(matches!(angle(&[1.0, 0.0], &[1.0, 0.0, 0.0], &c), Err(Error::DimMismatch { .. })));
    assert!(AngleConfig { norm_epsilon: 0.0, clamp: true }.validate().is_err());
}

#[test]
fn near_parallel_angles_keep_precision() {
    // arccos of the rounded cosine would give 0 or ~1.5e-8 here
    let (u, v) = ([1.0, 0.0], [1.0, 1e-9]);
    assert!((angle(&u, &v, &cfg()).unwrap() - 1e-9).abs() <= 1e-22);
    let (u, v) = ([1.0, 0.0, 0.0], [-1.0, 1e-9, 0.0]);
    assert!((angle(&u, &v, &cfg()).unwrap() - (PI - 1e-9)).abs() <= 1e-15);
    let a: f32 = angle(&[1.0f32, 0.0], &[0.0, 1.0], &AngleConfig::default()).unwrap();
    assert!((a - std::f32::consts::FRAC_PI_2).abs() <= 1e-6);
}

#[test]
fn orthant_examples() {
    let c = cfg();
    let (e1, e2, e3, e4) = ([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]);
    assert!((orthant2(&e1[..2], &e2[..2], &c).unwrap() - 0.25).abs() <= 1e-15);
    assert_eq!(orthant2(&[1.0, 2.0], &[1.0, 2.0], &c).unwrap(), 0.5);
    assert!(orthant2(&[1.0, 2.0], &[-1.0, -2.0], &c).unwrap().abs() <= 1e-15);

    let u = [0.3, -1.0, 2.0];
    assert_eq!(orthant3(&u, &u, &u, &c).unwrap(), 0.5);
    assert!((orthant3(&e1[..3], &e2[..3], &e3[..3], &c).unwrap() - 0.125).abs() <= 1e-15);

    assert!((orthant4(&e1, &e2, &e3, &e4, &c, &q()).unwrap() - 1.0 / 16.0).abs() <= 1e-12);
    let (a, b) = ([1.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
    assert!((orthant4(&a, &a, &b, &b, &c, &q()).unwrap() - 0.25).abs() <= 1e-12);
    // antipodal pair: empty intersection
    assert!(orthant4(&a, &[-1.0, 0.0, 0.0], &b, &[0.0, 0.0, 1.0], &c, &q()).unwrap().abs() <= 1e-12);
    assert_eq!(orthant4(&a, &b, &[0.0; 3], &b, &c, &q()).unwrap_err(), Error::ZeroVector);
}

#[test]
fn closed_forms_match_monte_carlo() {
    let mut r = RandomStream::new(1);
    let (u1, u2) = (rand_vec(3, &mut r), rand_vec(3, &mut r));
    let (mc, se) = mc_orthant(&[&u1, &u2], 100_000, &mut r).unwrap();
    assert!((orthant2(&u1, &u2, &cfg()).unwrap() - mc).abs() <= 3.0 * se);

    let v: Vec<Vec<f64>> = (0..3).map(|_| rand_vec(5, &mut r)).collect();
    let (mc, se) = mc_orthant(&[&v[0], &v[1], &v[2]], 100_000, &mut r).unwrap();
    assert!((orthant3(&v[0], &v[1], &v[2], &cfg()).unwrap() - mc).abs() <= 3.0 * se);

    let w: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(6, &mut r)).collect();
    let (mc, se) = mc_orthant(&[&w[0], &w[1], &w[2], &w[3]], 1_000_000, &mut r).unwrap();
    let cf = orthant4(&w[0], &w[1], &w[2], &w[3], &cfg(), &q()).unwrap();
    assert!((cf - mc).abs() <= 3.0 * se, "{cf} vs {mc} ± {se}");
}

#[test]
fn closed_forms_match_monte_carlo_in_random_dimensions() {
    // 1000 trials over K ∈ {2, 3, 4} and d ∈ {2, …, 8}; 99% within 3 SE
    let mut r = RandomStream::new(2);
    let mut inside = 0;
    for t in 0..1000 {
        let k = 2 + t % 3;
        let d = 2 + r.below(7);
        let vs: Vec<Vec<f64>> = (0..k).map(|_| rand_vec(d, &mut r)).collect();
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        let cf = match k {
            2 => orthant2(refs[0], refs[1], &cfg()),
            3 => orthant3(refs[0], refs[1], refs[2], &cfg()),
            _ => orthant4(refs[0], refs[1], refs[2], refs[3], &cfg(), &q()),
        }
        .unwrap();
        let (mc, se) = mc_orthant(&refs, 20_000, &mut r).unwrap();
        if (cf - mc).abs() <= 3.0 * se {
            inside += 1;
        }
    }
    assert!(inside >= 990, "{inside}/1000");
}

#[test]
fn orthant4_near_degenerate_inputs() {
    // nearly duplicated directions stay continuous with the collapsed formula
    let c = cfg();
    let mut r = RandomStream::new(3);
    for _ in 0..20 {
        let (a, b, e) = (rand_vec(4, &mut r), rand_vec(4, &mut r), rand_vec(4, &mut r));
        let exact = orthant3(&a, &b, &e, &c).unwrap();
        assert!((orthant4(&a, &a, &b, &e, &c, &q()).unwrap() - exact).abs() <= 1e-9);
        let a2: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + if i == 0 { 1e-6 } else { 0.0 }).collect();
        assert!((orthant4(&a, &a2, &b, &e, &c, &q()).unwrap() - exact).abs() <= 1e-5);
    }
}

#[test]
fn orthant4_in_the_plane() {
    let c = cfg();
    let dir = |deg: f64| [deg.to_radians().cos(), deg.to_radians().sin()];
    // directions spanning 30° leave an arc of 150°
    let v = orthant4(&dir(0.0), &dir(10.0), &dir(20.0), &dir(30.0), &c, &q()).unwrap();
    assert!((v - 5.0 / 12.0).abs() <= 1e-15);
    assert_eq!(orthant4(&dir(0.0), &dir(90.0), &dir(180.0), &dir(270.0), &c, &q()).unwrap(), 0.0);
    assert_eq!(orthant4(&dir(0.0), &dir(100.0), &dir(200.0), &dir(300.0), &c, &q()).unwrap(), 0.0);
    let v = orthant4(&dir(350.0), &dir(40.0), &dir(5.0), &dir(350.0), &c, &q()).unwrap();
    assert!((v - 130.0 / 360.0).abs() <= 1e-15);

    // embedding in d = 3 goes through the arcsine integral; same correlations, same value
    let mut r = RandomStream::new(5);
    for _ in 0..50 {
        let vs: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(2, &mut r)).collect();
        let up: Vec<Vec<f64>> = vs.iter().map(|v| vec![v[0], v[1], 0.0]).collect();
        let a = orthant4(&vs[0], &vs[1], &vs[2], &vs[3], &c, &q()).unwrap();
        let b = orthant4(&up[0], &up[1], &up[2], &up[3], &c, &q()).unwrap();
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        assert!((orthant4(&vs[0], &vs[0], &vs[1], &vs[2], &c, &q()).unwrap() - orthant3(&vs[0], &vs[1], &vs[2], &c).unwrap()).abs() <= 1e-14);
    }
}

#[test]
fn sphere_sample_examples() {
    let mut r = RandomStream::new(4);
    let s = sphere_sample::<f64>(1, 200, &mut r).unwrap();
    assert!(s.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));

    let n = 100_000;
    let s = sphere_sample::<f64>(3, n, &mut r).unwrap();
    for row in s.rows() {
        assert!((norm(row) - 1.0).abs() <= 1e-12);
    }
    for k in 0..3 {
        let m = s.rows().map(|row| row[k]).sum::<f64>() / n as f64;
        assert!(m.abs() <= 3.0 / (n as f64).sqrt());
    }
    let s = sphere_sample::<f64>(2, n, &mut r).unwrap();
    let p = s.rows().filter(|row| row[0] <= 0.0 && row[1] <= 0.0).count() as f64 / n as f64;
    assert!((p - 0.25).abs() <= 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    assert!(sphere_sample::<f64>(0, 5, &mut r).is_err());
    assert!(sphere_sample::<f64>(2, 0, &mut r).is_err());
}

#[test]
fn mc_orthant_examples() {
    let mut r = RandomStream::new(5);
    let (p, se): (f64, f64) = mc_orthant(&[&[1.0, 0.0, 0.0][..]], 100_000, &mut r).unwrap();
    assert!((p - 0.5).abs() <= 3.0 * se);
    let (p, se): (f64, f64) = mc_orthant(&[&[1.0, 0.0][..], &[-1.0, 0.0][..]], 1000, &mut r).unwrap();
    assert_eq!((p, se), (0.0, 0.0));
    let e: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let (p, se) = mc_orthant(&[&e[0][..], &e[1][..], &e[2][..]], 1_000_000, &mut r).unwrap();
    assert!((p - 0.125).abs() <= 3.0 * se);
    assert!(mc_orthant(&[&[1.0, 0.0][..]], 99, &mut r).is_err());
    assert_eq!(mc_orthant::<f64>(&[&[0.0, 0.0][..]], 1000, &mut r).unwrap_err(), Error::ZeroVector);
    // same stream, same estimate
    let (a, _): (f64, f64) = mc_orthant(&[&[1.0, 2.0][..]], 1000, &mut RandomStream::new(9)).unwrap();
    let (b, _): (f64, f64) = mc_orthant(&[&[1.0, 2.0][..]], 1000, &mut RandomStream::new(9)).unwrap();
    assert_eq!(a, b);
}

fn vecs(d: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), k)
        .prop_filter("usable", |vs| vs.iter().all(|v| norm(v) > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angle_symmetries(vs in vecs(3, 2), c in 0.01f64..100.0) {
        let (u, v) = (&vs[0], &vs[1]);
        let a = angle(u, v, &cfg()).unwrap();
        prop_assert!((0.0..=PI).contains(&a));
        prop_assert_eq!(a, angle(v, u, &cfg()).unwrap());
        let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
        prop_assert!((angle(&cu, v, &cfg()).unwrap() - a).abs() <= 1e-12);
        let nu: Vec<f64> = u.iter().map(|x| -x).collect();
        prop_assert!((angle(&nu, v, &cfg()).unwrap() - (PI - a)).abs() <= 1e-12);
    }

    #[test]
    fn orthants_are_rotation_and_scale_invariant(vs in vecs(4, 4), seed in 0u64..1000, s in prop::collection::vec(0.1f64..10.0, 4)) {
        let qm = random_orthogonal(4, &mut RandomStream::new(seed));
        let rot = |v: &Vec<f64>, c: f64| -> Vec<f64> {
            (0..4).map(|i| c * (0..4).map(|j| qm[i * 4 + j] * v[j]).sum::<f64>()).collect()
        };
        let ws: Vec<Vec<f64>> = vs.iter().zip(&s).map(|(v, &c)| rot(v, c)).collect();
        let c = cfg();
        prop_assert!((orthant2(&vs[0], &vs[1], &c).unwrap() - orthant2(&ws[0], &ws[1], &c).unwrap()).abs() <= 1e-12);
        prop_assert!((orthant3(&vs[0], &vs[1], &vs[2], &c).unwrap() - orthant3(&ws[0], &ws[1], &ws[2], &c).unwrap()).abs() <= 1e-12);
        let a = orthant4(&vs[0], &vs[1], &vs[2], &vs[3], &c, &q()).unwrap();
        let b = orthant4(&ws[0], &ws[1], &ws[2], &ws[3], &c, &q()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
        prop_assert!((-1e-12..=0.5 + 1e-12).contains(&a));
    }

    #[test]
    fn orthant4_is_symmetric(vs in vecs(5, 4)) {
        let c = cfg();
        let base = orthant4(&vs[0], &vs[1], &vs[2], &vs[3], &c, &q()).unwrap();
        for p in [[1, 0, 2, 3], [2, 3, 0, 1], [3, 1, 2, 0], [0, 2, 3, 1]] {
            let v = orthant4(&vs[p[0]], &vs[p[1]], &vs[p[2]], &vs[p[3]], &c, &q()).unwrap();
            prop_assert!((v - base).abs() <= 1e-9);
        }
    }

    #[test]
    fn orthant3_collapses_duplicates(vs in vecs(3, 2)) {
        let (u, v) = (&vs[0], &vs[1]);
        let a = orthant3(u, u, v, &cfg()).unwrap();
        let b = orthant2(u, v, &cfg()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=0.5).contains(&a));
    }
}
