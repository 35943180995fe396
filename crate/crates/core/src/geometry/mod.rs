//! Angles between vectors and uniform-sphere indicator integrals
//! (Gaussian orthant probabilities) for two, three and four vectors.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::matrix::{dot, SampleMatrix};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Zero-vector handling for angle computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleConfig<T> {
    /// Relative threshold: a vector whose norm is at most
    /// `norm_epsilon * max(1, scale)` counts as zero.
    pub norm_epsilon: T,
    /// Cosines are clamped to [-1, 1]; always on.
    pub clamp: bool,
}

impl<T: Scalar> Default for AngleConfig<T> {
    fn default() -> Self {
        AngleConfig { norm_epsilon: T::c(1e-12), clamp: true }
    }
}

impl<T: Scalar> AngleConfig<T> {
    pub fn threshold(&self, scale: T) -> T {
        self.norm_epsilon * scale.max(T::one())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.norm_epsilon > T::zero()) {
            return Err(Error::InvalidConfig("norm_epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Quadrature settings for [`orthant4`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Panels of 16 Gauss–Legendre nodes for the first estimate.
    pub base_panels: usize,
    /// Panels for the refined estimate.
    pub refined_panels: usize,
    /// Refine when the base estimate and a half-panel estimate differ by more.
    pub tolerance: f64,
    /// Give up when the refined estimate and its half-panel check still differ by more.
    pub fail_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { base_panels: 4, refined_panels: 16, tolerance: 1e-9, fail_tolerance: 1e-6 }
    }
}

/// arccos of a cosine clamped to [-1, 1].
#[inline]
pub fn angle_from_cos<T: Scalar>(c: T) -> T {
    c.max(-T::one()).min(T::one()).acos()
}

fn inf_norm<T: Scalar>(u: &[T]) -> T {
    u.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

fn check_dims<T>(u: &[T], v: &[T]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimMismatch { left: u.len(), right: v.len() });
    }
    if u.is_empty() {
        return Err(Error::InvalidConfig("vectors must have d >= 1".into()));
    }
    Ok(())
}

/// Cosines beyond this magnitude switch to the half-angle formula, where
/// arccos loses about half of the significant digits.
pub const NEAR_PARALLEL_COS: f64 = 0.99;

/// Angle between unit vectors `u` and `v`: arccos of the dot product when
/// well conditioned, otherwise 2·atan2(‖u − v‖, ‖u + v‖).
#[inline]
pub fn unit_angle<T: Scalar>(u: &[T], v: &[T]) -> T {
    if u.len() == 1 {
        return if u[0] * v[0] >= T::zero() { T::zero() } else { T::PI() };
    }
    let c = dot(u, v);
    if c.abs() <= T::c(NEAR_PARALLEL_COS) {
        return c.acos();
    }
    half_angle(u, v)
}

#[inline]
fn half_angle<T: Scalar>(u: &[T], v: &[T]) -> T {
    let (mut dm, mut dp) = (T::zero(), T::zero());
    for (&a, &b) in u.iter().zip(v) {
        dm = dm + (a - b) * (a - b);
        dp = dp + (a + b) * (a + b);
    }
    T::c(2.0) * dm.sqrt().atan2(dp.sqrt())
}

/// Angle between `u` and `v` in [0, π].
///
/// In one dimension the cosine is ±1 and the angle is snapped to 0 or π.
pub fn angle<T: Scalar>(u: &[T], v: &[T], cfg: &AngleConfig<T>) -> Result<T> {
    check_dims(u, v)?;
    let thr = cfg.threshold(inf_norm(u).max(inf_norm(v)));
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu <= thr || nv <= thr {
        return Err(Error::ZeroVector);
    }
    let uh: Vec<T> = u.iter().map(|&a| a / nu).collect();
    let vh: Vec<T> = v.iter().map(|&a| a / nv).collect();
    Ok(unit_angle(&uh, &vh))
}

/// ∫ 1(βᵀu₁ ≤ 0) 1(βᵀu₂ ≤ 0) dλ(β) = 1/2 − Ang(u₁, u₂)/(2π).
pub fn orthant2<T: Scalar>(u1: &[T], u2: &[T], cfg: &AngleConfig<T>) -> Result<T> {
    Ok(T::c(0.5) - angle(u1, u2, cfg)? / (T::c(2.0) * T::PI()))
}

/// Three-vector sphere integral: 1/2 − (1/4π)·(sum of the pairwise angles).
pub fn orthant3<T: Scalar>(u1: &[T], u2: &[T], u3: &[T], cfg: &AngleConfig<T>) -> Result<T> {
    let s = angle(u1, u2, cfg)? + angle(u1, u3, cfg)? + angle(u2, u3, cfg)?;
    Ok(orthant3_from_angles(s))
}

#[inline]
pub fn orthant3_from_angles<T: Scalar>(angle_sum: T) -> T {
    T::c(0.5) - angle_sum / (T::c(4.0) * T::PI())
}

/// Angles closer than this to 0 or π are treated as exact duplicates or
/// antipodes by [`orthant4`]; the induced error is below 1e-7.
const COLLAPSE_ANGLE: f64 = 1e-7;

/// Four-vector sphere integral:
/// 7/16 − (1/8π)·Σ_{i<j} Ang(uᵢ, uⱼ) + Q, with Q a one-dimensional integral
/// of arcsine terms over partial correlations. In d = 2 the region is an arc
/// and is measured directly.
pub fn orthant4<T: Scalar>(
    u1: &[T],
    u2: &[T],
    u3: &[T],
    u4: &[T],
    cfg: &AngleConfig<T>,
    quad: &QuadratureConfig,
) -> Result<T> {
    let us = [u1, u2, u3, u4];
    let mut ang = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let a = angle(us[i], us[j], cfg)?.as_f64();
            ang[i][j] = a;
            ang[j][i] = a;
        }
    }
    if u1.len() == 2 {
        return Ok(T::c(planar_orthant(&us)));
    }
    orthant4_from_angles(&ang, quad).map(T::c)
}

/// Sphere integral in d = 2, where four vectors are always rank deficient and
/// the arcsine integrand is ill conditioned. The region is the polar cone of
/// the vectors: an arc of length max(0, gap − π), with gap the largest angular
/// gap between consecutive directions.
fn planar_orthant<T: Scalar>(us: &[&[T]]) -> f64 {
    use std::f64::consts::PI;
    let mut phi: Vec<f64> = us.iter().map(|u| u[1].as_f64().atan2(u[0].as_f64())).collect();
    phi.sort_by(|a, b| a.partial_cmp(b).expect("finite direction"));
    let gap = phi.windows(2).map(|w| w[1] - w[0]).fold(phi[0] + 2.0 * PI - phi[phi.len() - 1], f64::max);
    ((gap - PI) / (2.0 * PI)).clamp(0.0, 0.5)
}

/// [`orthant4`] from the symmetric matrix of pairwise angles.
pub fn orthant4_from_angles(ang: &[[f64; 4]; 4], quad: &QuadratureConfig) -> Result<f64> {
    use std::f64::consts::PI;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if ang[i][j] >= PI - COLLAPSE_ANGLE {
                return Ok(0.0);
            }
        }
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            if ang[i][j] <= COLLAPSE_ANGLE {
                let rest: Vec<usize> = (0..4).filter(|&k| k != j).collect();
                let s = ang[rest[0]][rest[1]] + ang[rest[0]][rest[2]] + ang[rest[1]][rest[2]];
                return Ok(orthant3_from_angles(s));
            }
        }
    }
    let mut rho = [[1.0f64; 4]; 4];
    let mut angle_sum = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            rho[i][j] = ang[i][j].cos();
            rho[j][i] = rho[i][j];
            angle_sum += ang[i][j];
        }
    }
    let q = q_integral(&rho, quad)?;
    Ok((7.0 / 16.0 - angle_sum / (8.0 * PI) + q).clamp(0.0, 0.5))
}

const GAMMA_FLOOR: f64 = 1e-14;

/// Q = (1/4π²) Σ_{ℓ=2,3,4} ∫₀¹ ρ₁ℓ (1 − ρ₁ℓ²u²)^{-1/2} arcsin(γ₁,ℓ/(γ₂,ℓ γ₃,ℓ)) du.
///
/// Each term is integrated after the substitution ρ₁ℓ u = sin φ, which
/// removes the endpoint singularity of the weight.
fn q_integral(rho: &[[f64; 4]; 4], quad: &QuadratureConfig) -> Result<f64> {
    let (r12, r13, r14) = (rho[0][1], rho[0][2], rho[0][3]);
    let (r23, r24, r34) = (rho[1][2], rho[1][3], rho[2][3]);

    let a2 = |u2: f64| (1.0 - r23 * r23 - (r12 * r12 + r13 * r13 - 2.0 * r12 * r13 * r23) * u2).max(0.0).sqrt();
    let b2 = |u2: f64| (1.0 - r24 * r24 - (r12 * r12 + r14 * r14 - 2.0 * r12 * r14 * r24) * u2).max(0.0).sqrt();
    let c2 = |u2: f64| (1.0 - r34 * r34 - (r13 * r13 + r14 * r14 - 2.0 * r13 * r14 * r34) * u2).max(0.0).sqrt();

    let g12 = |u2: f64| r34 - r23 * r24 - (r13 * r14 + r12 * (r12 * r34 - r14 * r23 - r13 * r24)) * u2;
    let g13 = |u2: f64| r24 - r23 * r34 - (r12 * r14 + r13 * (r13 * r24 - r14 * r23 - r12 * r34)) * u2;
    let g14 = |u2: f64| r23 - r24 * r34 - (r12 * r13 + r14 * (r14 * r23 - r13 * r24 - r12 * r34)) * u2;

    let arcsin_ratio = |num: f64, den: f64| (num / den.max(GAMMA_FLOOR)).clamp(-1.0, 1.0).asin();

    let term = |l: usize, panels: Option<usize>, rule_n: usize| -> f64 {
        let r1l = rho[0][l];
        let f = |u: f64| {
            let u2 = u * u;
            match l {
                1 => arcsin_ratio(g12(u2), a2(u2) * b2(u2)),
                2 => arcsin_ratio(g13(u2), a2(u2) * c2(u2)),
                _ => arcsin_ratio(g14(u2), b2(u2) * c2(u2)),
            }
        };
        let integrate = |g: &dyn Fn(f64) -> f64| match panels {
            Some(p) => quadrature::rule_with_panels(p).integrate(g),
            None => quadrature::rule(rule_n).integrate(g),
        };
        // t = 1 − (1 − s)² grades the nodes toward u = 1, where the partial
        // correlation denominators vanish for rank-deficient configurations.
        if r1l.abs() < 1e-8 {
            return r1l * integrate(&|s| f(1.0 - (1.0 - s) * (1.0 - s)) * 2.0 * (1.0 - s));
        }
        let phi_max = r1l.asin();
        phi_max
            * integrate(&|s| {
                let t = 1.0 - (1.0 - s) * (1.0 - s);
                f((t * phi_max).sin() / r1l) * 2.0 * (1.0 - s)
            })
    };

    let total = |panels: usize| -> f64 {
        let (p, n) = match panels {
            4 => (None, 64),
            16 => (None, 256),
            p => (Some(p), 0),
        };
        (1..4).map(|l| term(l, p, n)).sum::<f64>()
    };

    let scale = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let base = total(quad.base_panels) * scale;
    let coarse = total((quad.base_panels / 2).max(1)) * scale;
    if (base - coarse).abs() <= quad.tolerance {
        return Ok(base);
    }
    let refined = total(quad.refined_panels) * scale;
    let check = total((quad.refined_panels / 2).max(1)) * scale;
    let diff = (refined - check).abs();
    if diff > quad.fail_tolerance {
        return Err(Error::QuadratureFailure { diff });
    }
    Ok(refined)
}

/// `n` i.i.d. uniform directions on the unit sphere in `d` dimensions.
pub fn sphere_sample<T: Scalar>(d: usize, n: usize, rng: &mut RandomStream) -> Result<SampleMatrix<T>> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidConfig("sphere_sample needs d >= 1 and n >= 1".into()));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut buf = vec![0.0f64; d];
    for _ in 0..n {
        loop {
            for b in buf.iter_mut() {
                *b = rng.gaussian();
            }
            let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                data.extend(buf.iter().map(|v| T::c(v / norm)));
                break;
            }
        }
    }
    SampleMatrix::new(data, n, d)
}

/// Monte-Carlo estimate of ∫ Π_k 1(βᵀu_k ≤ 0) dλ(β) with its binomial
/// standard error.
pub fn mc_orthant<T: Scalar>(vectors: &[&[T]], n_samples: usize, rng: &mut RandomStream) -> Result<(T, T)> {
    let cfg = AngleConfig::<T>::default();
    let first = vectors.first().ok_or(Error::ZeroVector)?;
    if n_samples < 100 {
        return Err(Error::InvalidConfig("mc_orthant needs at least 100 samples".into()));
    }
    let d = first.len();
    for v in vectors {
        check_dims(first, v)?;
        if dot(v, v).sqrt() <= cfg.threshold(inf_norm(v)) {
            return Err(Error::ZeroVector);
        }
    }
    let vs: Vec<Vec<f64>> = vectors.iter().map(|v| v.iter().map(|x| x.as_f64()).collect()).collect();
    let mut beta = vec![0.0f64; d];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for b in beta.iter_mut() {
            *b = rng.gaussian();
        }
        if vs.iter().all(|v| v.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() <= 0.0) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples as f64;
    let se = (p * (1.0 - p) / n_samples as f64).sqrt();
    Ok((T::c(p), T::c(se)))
}
