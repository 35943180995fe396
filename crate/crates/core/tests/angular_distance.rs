mod common;

use std::f64::consts::PI;

use common::*;
use projcvm::angular_distance::*;
use projcvm::two_sample::u_cvm;
use projcvm::{AngleConfig, Error, RandomStream, SampleMatrix};
use proptest::prelude::*;

fn cfg() -> AngleConfig<f64> {
    AngleConfig::default()
}

fn ctx_of(reference: SampleMatrix<f64>) -> AngularDistanceCtx<f64> {
    AngularDistanceCtx::new(reference, cfg()).unwrap()
}

#[test]
fn point_examples() {
    let c = cfg();
    assert_eq!(rho_angle_point(&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0], &c).unwrap(), 0.0);
    assert_eq!(rho_angle_point(&[-1.0, 0.0], &[3.0, 0.0], &[0.0, 0.0], &c).unwrap(), 1.0);
    assert!((rho_angle_point(&[1.0, 1.0], &[0.0, 2.0], &[0.0, 1.0], &c).unwrap() - 0.5).abs() <= 1e-15);
    assert_eq!(rho_angle_point(&[1.0, 1.0], &[0.0, 2.0], &[1.0, 1.0], &c).unwrap_err(), Error::ZeroVector);
}

#[test]
fn rho_examples() {
    let mut r = RandomStream::new(1);
    let reference = gaussian(50, 3, &mut r);
    let ctx = ctx_of(reference.clone());
    let z = [0.3, -0.2, 1.0];
    assert_eq!(rho_angle(&z, &z, &ctx).unwrap(), 0.0);
    // the diagonal is zero even when every reference row coincides with z
    let at_z = ctx_of(SampleMatrix::from_rows(&[z.to_vec()]).unwrap());
    assert_eq!(rho_angle(&z, &z, &at_z).unwrap(), 0.0);
    assert_eq!(rho_angle(&z, &[1.0, 1.0, 1.0], &at_z).unwrap_err(), Error::NoUsableReference);

    let w = [0.5, 0.5, 0.5];
    let one = ctx_of(SampleMatrix::from_rows(&[w.to_vec()]).unwrap());
    let zp = [-1.0, 2.0, 0.0];
    assert_eq!(rho_angle(&z, &zp, &one).unwrap(), rho_angle_point(&z, &zp, &w, &cfg()).unwrap());

    // symmetric, in [0, 1], and the brute-force mean over reference rows
    let (a, b) = (reference.row(3).to_vec(), [2.0, 0.0, -1.0]);
    let (v, skipped) = rho_angle_counted(&a, &b, &ctx).unwrap();
    assert_eq!(skipped, 1);
    assert_eq!(v, rho_angle(&b, &a, &ctx).unwrap());
    let direct: f64 = reference.rows().filter(|w| *w != &a[..]).map(|w| ang(&sub(&a, w), &sub(&b, w))).sum::<f64>() / 49.0 / PI;
    assert!((v - direct).abs() <= 1e-12 && (0.0..=1.0).contains(&v));
}

#[test]
fn balanced_reference_weights_each_sample_equally() {
    let mut r = RandomStream::new(2);
    let (x, y) = (gaussian(3, 2, &mut r), shifted(7, 2, 2.0, &mut r));
    let both = AngularDistanceCtx::balanced(x.clone(), y.clone(), cfg()).unwrap();
    let (z, zp) = ([0.1, 0.9], [-1.2, 0.4]);
    let half = 0.5 * (rho_angle(&z, &zp, &ctx_of(x.clone())).unwrap() + rho_angle(&z, &zp, &ctx_of(y.clone())).unwrap());
    assert!((rho_angle(&z, &zp, &both).unwrap() - half).abs() <= 1e-15);
    assert!(matches!(AngularDistanceCtx::balanced(x, gaussian(3, 3, &mut r), cfg()), Err(Error::DimMismatch { .. })));

    let sub = AngularDistanceCtx::subsampled(&gaussian(40, 2, &mut r), &gaussian(60, 2, &mut r), 10, cfg(), &mut r).unwrap();
    assert_eq!(sub.groups().iter().map(|g| g.nrows()).collect::<Vec<_>>(), vec![10, 10]);
}

#[test]
fn matches_fresh_gaussian_monte_carlo() {
    let mut r = RandomStream::new(3);
    let reference = gaussian(2000, 3, &mut r);
    let (z, zp) = ([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
    let est = rho_angle(&z, &zp, &ctx_of(reference.clone())).unwrap();
    let fresh: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let w = [r.gaussian(), r.gaussian(), r.gaussian()];
            ang(&sub(&z, &w), &sub(&zp, &w)) / PI
        })
        .collect();
    let (mc, se_mc) = mean_se(&fresh);
    // the empirical reference carries its own sampling error
    let per_ref: Vec<f64> = reference.rows().map(|w| ang(&sub(&z, w), &sub(&zp, w)) / PI).collect();
    let (_, se_ref) = mean_se(&per_ref);
    let se = (se_mc * se_mc + se_ref * se_ref).sqrt();
    assert!((est - mc).abs() <= 3.0 * se, "{est} vs {mc} ± {se}");
}

#[test]
fn negative_type_examples() {
    let mut r = RandomStream::new(4);
    let ctx = ctx_of(gaussian(30, 2, &mut r));
    let (a, b) = ([0.5, 0.1], [-0.3, 1.0]);
    let v = negative_type_form(&[&a, &b], &[1.0, -1.0], &ctx).unwrap();
    assert!((v + 2.0 * rho_angle(&a, &b, &ctx).unwrap()).abs() <= 1e-15 && v <= 0.0);
    assert_eq!(negative_type_form(&[&a, &a, &a], &[1.0, 0.5, -1.5], &ctx).unwrap(), 0.0);
    assert_eq!(negative_type_form(&[&a, &b], &[1.0, -0.5], &ctx).unwrap_err(), Error::WeightsNotBalanced(0.5));
    assert!(matches!(negative_type_form(&[&a], &[0.0], &ctx), Err(Error::TooFewSamples { .. })));
}

#[test]
fn metric_and_negative_type_on_random_configurations() {
    let mut r = RandomStream::new(5);
    let ctx = ctx_of(gaussian(60, 4, &mut r));
    for _ in 0..500 {
        let pts: Vec<Vec<f64>> = (0..10).map(|_| (0..4).map(|_| 2.0 * r.gaussian()).collect()).collect();
        let mut w: Vec<f64> = (0..10).map(|_| r.gaussian()).collect();
        let mean = w.iter().sum::<f64>() / 10.0;
        w.iter_mut().for_each(|v| *v -= mean);
        w[9] = -w[..9].iter().sum::<f64>();
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        assert!(negative_type_form(&refs, &w, &ctx).unwrap() <= 1e-10);

        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        let ab = rho_angle(a, b, &ctx).unwrap();
        assert_eq!(ab, rho_angle(b, a, &ctx).unwrap());
        assert!(ab <= rho_angle(a, c, &ctx).unwrap() + rho_angle(b, c, &ctx).unwrap() + 1e-12);
    }
}

/// Direct plug-in through `rho_angle`.
fn brute_energy(x: &SampleMatrix<f64>, y: &SampleMatrix<f64>, ctx: &AngularDistanceCtx<f64>) -> f64 {
    let (xr, yr) = (rows(x), rows(y));
    let within = |s: &[Vec<f64>]| {
        let mut t = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if i != j {
                    t += rho_angle(&s[i], &s[j], ctx).unwrap();
                }
            }
        }
        t / (s.len() * (s.len() - 1)) as f64
    };
    let mut c = 0.0;
    for a in &xr {
        for b in &yr {
            c += rho_angle(a, b, ctx).unwrap();
        }
    }
    c /= (xr.len() * yr.len()) as f64;
    (2.0 * c - within(&xr) - within(&yr)) / 2.0
}

#[test]
fn generalized_energy_examples() {
    let mut r = RandomStream::new(6);
    let (x, y) = (gaussian(7, 3, &mut r), shifted(5, 3, 1.0, &mut r));
    let ctx = AngularDistanceCtx::balanced(x.clone(), y.clone(), cfg()).unwrap();
    let v = generalized_energy_from_rho(&x, &y, &ctx).unwrap();
    assert!((v - brute_energy(&x, &y, &ctx)).abs() <= 1e-12);
    assert!((v - generalized_energy_from_rho(&y, &x, &ctx).unwrap()).abs() <= 1e-15);

    // X = Y as multisets: the cross mean keeps the m zero terms ρ(xᵢ, xᵢ), so the
    // value is −mean_{≠}ρ(X, X′)/m rather than 0
    let ctx = ctx_of(gaussian(40, 3, &mut r));
    let wx = {
        let xr = rows(&x);
        let mut t = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                if i != j {
                    t += rho_angle(&xr[i], &xr[j], &ctx).unwrap();
                }
            }
        }
        t / 42.0
    };
    assert!((generalized_energy_from_rho(&x, &x, &ctx).unwrap() + wx / 7.0).abs() <= 1e-12);
    assert!(matches!(generalized_energy_from_rho(&col(&[1.0]), &col(&[1.0, 2.0]), &ctx_of(col(&[0.0]))), Err(Error::TooFewSamples { .. })));
}

#[test]
fn generalized_energy_tracks_u_cvm() {
    let mut r = RandomStream::new(7);
    let (x, y) = (gaussian(300, 3, &mut r), shifted(300, 3, 0.8, &mut r));
    let ctx = AngularDistanceCtx::subsampled(&x, &y, 100, cfg(), &mut r).unwrap();
    let g = generalized_energy_from_rho(&x, &y, &ctx).unwrap();
    let u = u_cvm(&x, &y, &cfg()).unwrap().value;
    assert!((g - u).abs() <= 0.01, "{g} vs {u}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn rho_is_bounded_and_symmetric(seed in 0u64..10_000, d in 1usize..6) {
        let mut r = RandomStream::new(seed);
        let ctx = ctx_of(gaussian(20, d, &mut r));
        let a: Vec<f64> = (0..d).map(|_| r.gaussian()).collect();
        let b: Vec<f64> = (0..d).map(|_| r.gaussian()).collect();
        let v = rho_angle(&a, &b, &ctx).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, rho_angle(&b, &a, &ctx).unwrap());
    }
}
