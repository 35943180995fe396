//! Angular distance ρ(z, z′) = E[Ang(z − Z*, z′ − Z*)]/π with Z* drawn from the
//! balanced mixture of two reference samples, its negative-type quadratic form,
//! and the generalized energy built from it.
//!
//! Over a wide uniform reference the distance is close to a multiple of the
//! Euclidean one. In d = 2, doubling ‖z − z′‖ roughly doubles ρ:
//!
//! ```
//! use projcvm::angular_distance::{rho_angle, AngularDistanceCtx};
//! use projcvm::{AngleConfig, RandomStream, SampleMatrix};
//!
//! let mut r = RandomStream::new(1);
//! let box_ref = SampleMatrix::from_fn(20_000, 2, |_, _| 100.0 * r.uniform() - 50.0).unwrap();
//! let ctx = AngularDistanceCtx::new(box_ref, AngleConfig::default()).unwrap();
//! let near = rho_angle(&[0.0, 0.0], &[1.0, 0.0], &ctx).unwrap();
//! let far = rho_angle(&[0.0, 0.0], &[2.0, 0.0], &ctx).unwrap();
//! assert!((far / near - 2.0).abs() <= 0.2);
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angle, unit_angle, AngleConfig};
use crate::matrix::{dot, SampleMatrix};
use crate::rng::RandomStream;
use crate::scalar::{PairwiseAcc, Scalar};

/// (1/π)·Ang(z − w, z′ − w).
pub fn rho_angle_point<T: Scalar>(z: &[T], zp: &[T], w: &[T], cfg: &AngleConfig<T>) -> Result<T> {
    let u: Vec<T> = z.iter().zip(w).map(|(&a, &b)| a - b).collect();
    let v: Vec<T> = zp.iter().zip(w).map(|(&a, &b)| a - b).collect();
    Ok(angle(&u, &v, cfg)? / T::PI())
}

/// Reference groups for Z*. Each group gets equal weight whatever its size.
#[derive(Debug, Clone)]
pub struct AngularDistanceCtx<T> {
    groups: Vec<SampleMatrix<T>>,
    cfg: AngleConfig<T>,
    scale: T,
}

impl<T: Scalar> AngularDistanceCtx<T> {
    /// Equal weight on every reference row.
    pub fn new(reference: SampleMatrix<T>, cfg: AngleConfig<T>) -> Result<Self> {
        Self::from_groups(vec![reference], cfg)
    }

    /// Z* ~ (1/2)P_X + (1/2)P_Y: average over each sample, then over the two.
    pub fn balanced(x: SampleMatrix<T>, y: SampleMatrix<T>, cfg: AngleConfig<T>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::DimMismatch { left: x.ncols(), right: y.ncols() });
        }
        Self::from_groups(vec![x, y], cfg)
    }

    /// Balanced reference of at most `per_group` rows drawn without replacement from each sample.
    pub fn subsampled(x: &SampleMatrix<T>, y: &SampleMatrix<T>, per_group: usize, cfg: AngleConfig<T>, rng: &mut RandomStream) -> Result<Self> {
        let mut pick = |s: &SampleMatrix<T>| {
            let mut idx: Vec<usize> = (0..s.nrows()).collect();
            rng.shuffle(&mut idx);
            idx.truncate(per_group.max(1));
            idx.sort_unstable();
            s.select(&idx)
        };
        let (gx, gy) = (pick(x), pick(y));
        Self::balanced(gx, gy, cfg)
    }

    fn from_groups(groups: Vec<SampleMatrix<T>>, cfg: AngleConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let scale = groups.iter().map(|g| g.max_abs()).fold(T::zero(), T::max);
        Ok(AngularDistanceCtx { groups, cfg, scale })
    }

    pub fn dim(&self) -> usize {
        self.groups[0].ncols()
    }

    pub fn groups(&self) -> &[SampleMatrix<T>] {
        &self.groups
    }

    fn threshold(&self, extra: T) -> T {
        self.cfg.threshold(self.scale.max(extra))
    }
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
}

/// ρ(z, z′) and the number of reference rows skipped because they coincide with z or z′.
pub fn rho_angle_counted<T: Scalar>(z: &[T], zp: &[T], ctx: &AngularDistanceCtx<T>) -> Result<(T, u64)> {
    let d = ctx.dim();
    if z.len() != d || zp.len() != d {
        return Err(Error::DimMismatch { left: d, right: if z.len() != d { z.len() } else { zp.len() } });
    }
    let thr = ctx.threshold(max_abs(z).max(max_abs(zp)));
    let mut skipped = 0u64;
    let mut means = Vec::with_capacity(ctx.groups.len());
    let (mut u, mut v) = (vec![T::zero(); d], vec![T::zero(); d]);
    let same = z == zp;
    for g in &ctx.groups {
        let mut acc = PairwiseAcc::new();
        let mut used = 0usize;
        for w in g.rows() {
            for k in 0..d {
                u[k] = z[k] - w[k];
                v[k] = zp[k] - w[k];
            }
            let (nu, nv) = (dot(&u, &u).sqrt(), dot(&v, &v).sqrt());
            if nu <= thr || nv <= thr {
                skipped += 1;
                continue;
            }
            used += 1;
            if same {
                continue;
            }
            for k in 0..d {
                u[k] = u[k] / nu;
                v[k] = v[k] / nv;
            }
            acc.add(unit_angle(&u, &v));
        }
        if used > 0 {
            means.push(acc.total() / T::of_usize(used));
        }
    }
    if same {
        return Ok((T::zero(), skipped));
    }
    if means.is_empty() {
        return Err(Error::NoUsableReference);
    }
    let mean = means.iter().fold(T::zero(), |s, &m| s + m) / T::of_usize(means.len());
    Ok(((mean / T::PI()).min(T::one()), skipped))
}

/// Empirical angular distance; symmetric, in [0, 1], zero on the diagonal.
pub fn rho_angle<T: Scalar>(z: &[T], zp: &[T], ctx: &AngularDistanceCtx<T>) -> Result<T> {
    Ok(rho_angle_counted(z, zp, ctx)?.0)
}

/// Σᵢⱼ αᵢαⱼ ρ(zᵢ, zⱼ) for weights summing to zero; never positive for a metric of negative type.
pub fn negative_type_form<T: Scalar>(points: &[&[T]], weights: &[T], ctx: &AngularDistanceCtx<T>) -> Result<T> {
    if points.len() != weights.len() {
        return Err(Error::DimMismatch { left: points.len(), right: weights.len() });
    }
    if points.len() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: points.len() });
    }
    let sum = weights.iter().fold(T::zero(), |s, &w| s + w);
    if sum.abs().as_f64() > 1e-12 {
        return Err(Error::WeightsNotBalanced(sum.as_f64()));
    }
    let mut acc = PairwiseAcc::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            acc.add(T::c(2.0) * weights[i] * weights[j] * rho_angle(points[i], points[j], ctx)?);
        }
    }
    Ok(acc.total())
}

/// Unit vectors of z_a − w over all reference rows w, flat per point, with a
/// validity mask (false where z_a = w).
struct PointUnits<T> {
    units: Vec<T>,
    valid: Vec<bool>,
}

fn point_units<T: Scalar>(za: &[T], refs: &[&[T]], thr: T) -> PointUnits<T> {
    let d = za.len();
    let mut units = vec![T::zero(); refs.len() * d];
    let mut valid = vec![false; refs.len()];
    for (w, r) in refs.iter().enumerate() {
        let u = &mut units[w * d..(w + 1) * d];
        for k in 0..d {
            u[k] = za[k] - r[k];
        }
        let nu = dot(u, u).sqrt();
        if nu > thr {
            valid[w] = true;
            for v in u.iter_mut() {
                *v = *v / nu;
            }
        }
    }
    PointUnits { units, valid }
}

/// (1/2)[2·mean ρ(Xᵢ, Yⱼ) − mean_{i≠i′} ρ(Xᵢ, Xᵢ′) − mean_{j≠j′} ρ(Yⱼ, Yⱼ′)], an estimate of W².
/// Every ρ is evaluated exactly as [`rho_angle`] would, against the context's reference.
pub fn generalized_energy_from_rho<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, ctx: &AngularDistanceCtx<T>) -> Result<T> {
    let (m, n) = (x.nrows(), y.nrows());
    if m.min(n) < 2 {
        return Err(Error::TooFewSamples { need: 2, got: m.min(n) });
    }
    if x.ncols() != ctx.dim() || y.ncols() != ctx.dim() {
        return Err(Error::DimMismatch { left: ctx.dim(), right: x.ncols() });
    }
    let z = x.stack(y)?;
    let nn = m + n;
    let thr = ctx.threshold(z.max_abs());
    let d = ctx.dim();
    let refs: Vec<&[T]> = ctx.groups.iter().flat_map(|g| g.rows()).collect();
    let mut ranges = Vec::new();
    let mut start = 0;
    for g in &ctx.groups {
        ranges.push(start..start + g.nrows());
        start += g.nrows();
    }
    let pts: Vec<PointUnits<T>> = (0..nn).into_par_iter().map(|a| point_units(z.row(a), &refs, thr)).collect();
    let rho = |a: usize, b: usize| -> Result<T> {
        if z.row(a) == z.row(b) {
            return Ok(T::zero());
        }
        let (pa, pb) = (&pts[a], &pts[b]);
        let mut total = T::zero();
        let mut groups = 0usize;
        for r in &ranges {
            let mut s = T::zero();
            let mut used = 0usize;
            for w in r.clone() {
                if pa.valid[w] && pb.valid[w] {
                    s = s + unit_angle(&pa.units[w * d..(w + 1) * d], &pb.units[w * d..(w + 1) * d]);
                    used += 1;
                }
            }
            if used > 0 {
                total = total + s / T::of_usize(used);
                groups += 1;
            }
        }
        if groups == 0 {
            return Err(Error::NoUsableReference);
        }
        Ok((total / (T::of_usize(groups) * T::PI())).min(T::one()))
    };
    // row a: (Σ_{b>a, same group} ρ, Σ_{b in other group} ρ) for a in X
    let rows: Vec<(T, T)> = (0..nn)
        .into_par_iter()
        .map(|a| {
            let (mut within, mut cross) = (T::zero(), T::zero());
            for b in (a + 1)..nn {
                let v = rho(a, b)?;
                if (a < m) == (b < m) {
                    within = within + v;
                } else {
                    cross = cross + v;
                }
            }
            Ok((within, cross))
        })
        .collect::<Result<_>>()?;
    let (mut wx, mut wy, mut c) = (PairwiseAcc::new(), PairwiseAcc::new(), PairwiseAcc::new());
    for (a, &(w, cr)) in rows.iter().enumerate() {
        if a < m {
            wx.push_partial(w);
        } else {
            wy.push_partial(w);
        }
        c.push_partial(cr);
    }
    let two = T::c(2.0);
    let mean_x = two * wx.total() / T::of_usize(m * (m - 1));
    let mean_y = two * wy.total() / T::of_usize(n * (n - 1));
    let mean_c = c.total() / T::of_usize(m * n);
    Ok((two * mean_c - mean_x - mean_y) / two)
}
