use crate::error::{Error, Result};
use crate::geometry::{unit_angle, AngleConfig};
use crate::matrix::{dot, SampleMatrix};
use crate::scalar::{PairwiseAcc, Scalar};

use super::pooled::PooledSample;
use super::{Bandwidth, MmdConfig, StatKind, StatValue};

fn need2(xs: &[usize], ys: &[usize]) -> Result<()> {
    let got = xs.len().min(ys.len());
    if got < 2 {
        return Err(Error::TooFewSamples { need: 2, got });
    }
    Ok(())
}

/// Mean of f over ordered distinct pairs within `s` and over all cross pairs.
fn pair_means<T: Scalar>(xs: &[usize], ys: &[usize], f: impl Fn(usize, usize) -> T) -> (T, T, T) {
    let within = |s: &[usize]| {
        let mut acc = PairwiseAcc::new();
        for (k, &a) in s.iter().enumerate() {
            let mut r = T::zero();
            for &b in &s[k + 1..] {
                r = r + f(a, b);
            }
            acc.push_partial(r);
        }
        // each unordered pair stands for two ordered ones
        acc.total() * T::c(2.0) / T::of_usize(s.len() * (s.len() - 1))
    };
    let mut cross = PairwiseAcc::new();
    for &a in xs {
        let mut r = T::zero();
        for &b in ys {
            r = r + f(a, b);
        }
        cross.push_partial(r);
    }
    (within(xs), within(ys), cross.total() / T::of_usize(xs.len() * ys.len()))
}

/// 2·mean‖X−Y‖ − mean_{≠}‖X−X′‖ − mean_{≠}‖Y−Y′‖.
pub fn energy<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    need2(xs, ys)?;
    let (wx, wy, c) = pair_means(xs, ys, |a, b| ps.dist(a, b));
    Ok(StatValue { value: T::c(2.0) * c - wx - wy, kind: StatKind::Energy, skipped_tuples: 0 })
}

/// Resolve ς² for the Gaussian kernel exp(−‖·‖²/(2ς²)).
pub fn mmd_sigma2<T: Scalar>(ps: &PooledSample<T>, cfg: &MmdConfig<T>) -> Result<T> {
    match cfg.bandwidth {
        Bandwidth::Fixed(s2) => {
            if !(s2 > T::zero()) {
                return Err(Error::InvalidConfig("bandwidth must be positive".into()));
            }
            Ok(s2)
        }
        Bandwidth::Median => {
            let med = ps.median_distance();
            if !(med > T::zero()) {
                return Err(Error::ZeroBandwidth);
            }
            Ok(med * med)
        }
    }
}

pub fn mmd<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize], cfg: &MmdConfig<T>) -> Result<StatValue<T>> {
    need2(xs, ys)?;
    let s2 = mmd_sigma2(ps, cfg)?;
    let scale = -T::one() / (T::c(2.0) * s2);
    let (wx, wy, c) = pair_means(xs, ys, |a, b| {
        let dd = ps.dist(a, b);
        (dd * dd * scale).exp()
    });
    Ok(StatValue { value: wx + wy - T::c(2.0) * c, kind: StatKind::Mmd, skipped_tuples: 0 })
}

/// S_XX/(m)₂ + S_YY/(n)₂ − 2S_XY/(mn), where S_XX sums xᵢᵀxₖ over i ≠ k.
/// Equal to the quadruple sum of (X_{i₁}−Y_{j₁})ᵀ(X_{i₂}−Y_{j₂}) over
/// (m)₂(n)₂ ordered tuples.
pub fn cq<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    need2(xs, ys)?;
    let z = ps.coords();
    let d = z.ncols();
    let sum_and_diag = |s: &[usize]| {
        let mut tot = vec![T::zero(); d];
        let mut diag = PairwiseAcc::new();
        for &a in s {
            let r = z.row(a);
            for k in 0..d {
                tot[k] = tot[k] + r[k];
            }
            diag.add(dot(r, r));
        }
        (tot, diag.total())
    };
    let (tx, dx) = sum_and_diag(xs);
    let (ty, dy) = sum_and_diag(ys);
    let (m, n) = (xs.len(), ys.len());
    let sxx = dot(&tx, &tx) - dx;
    let syy = dot(&ty, &ty) - dy;
    let sxy = dot(&tx, &ty);
    let value = sxx / T::of_usize(m * (m - 1)) + syy / T::of_usize(n * (n - 1)) - T::c(2.0) * sxy / T::of_usize(m * n);
    Ok(StatValue { value, kind: StatKind::Cq, skipped_tuples: 0 })
}

/// Spatial-rank statistic: average of e_{i₁j₁}ᵀe_{i₂j₂} over i₁≠i₂, j₁≠j₂,
/// with e_ij the unit vector of xᵢ − yⱼ. Uses
/// Σ = ‖S‖² − Σᵢ‖Rᵢ‖² − Σⱼ‖Cⱼ‖² + Σ‖e_ij‖² with row sums Rᵢ and column sums Cⱼ.
pub fn wmw<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    need2(xs, ys)?;
    let z = ps.coords();
    let d = z.ncols();
    let (m, n) = (xs.len(), ys.len());
    let mut total = vec![T::zero(); d];
    let mut cols = vec![T::zero(); n * d];
    let mut row = vec![T::zero(); d];
    let mut e = vec![T::zero(); d];
    let mut rows_sq = PairwiseAcc::new();
    let mut rcount = vec![0u64; m];
    let mut ccount = vec![0u64; n];
    let mut usable: u64 = 0;
    for (i, &a) in xs.iter().enumerate() {
        row.iter_mut().for_each(|v| *v = T::zero());
        let za = z.row(a);
        for (j, &b) in ys.iter().enumerate() {
            if ps.is_tied(a, b) {
                continue;
            }
            let zb = z.row(b);
            let inv = T::one() / ps.dist(a, b);
            for k in 0..d {
                e[k] = (za[k] - zb[k]) * inv;
            }
            let col = &mut cols[j * d..(j + 1) * d];
            for k in 0..d {
                row[k] = row[k] + e[k];
                col[k] = col[k] + e[k];
            }
            rcount[i] += 1;
            ccount[j] += 1;
            usable += 1;
        }
        rows_sq.add(dot(&row, &row));
        for k in 0..d {
            total[k] = total[k] + row[k];
        }
    }
    let mut cols_sq = PairwiseAcc::new();
    for j in 0..n {
        let c = &cols[j * d..(j + 1) * d];
        cols_sq.add(dot(c, c));
    }
    let valid = usable * usable - rcount.iter().map(|r| r * r).sum::<u64>() - ccount.iter().map(|c| c * c).sum::<u64>() + usable;
    if valid == 0 {
        return Err(Error::AllTuplesTied);
    }
    let skipped = (m * (m - 1) * n * (n - 1)) as u64 - valid;
    // each usable ‖e_ij‖² is 1
    let sum = dot(&total, &total) - rows_sq.total() - cols_sq.total() + T::c(usable as f64);
    Ok(StatValue { value: sum / T::c(valid as f64), kind: StatKind::Wmw, skipped_tuples: skipped })
}

/// Unit vectors of the usable rows of `z` and the number of skipped rows.
pub(crate) fn usable_units<T: Scalar>(z: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> (Vec<Vec<T>>, usize) {
    let thr = cfg.threshold(z.max_abs());
    let mut out = Vec::new();
    let mut skipped = 0;
    for r in z.rows() {
        let nr = dot(r, r).sqrt();
        if nr <= thr {
            skipped += 1;
            continue;
        }
        out.push(r.iter().map(|&v| v / nr).collect());
    }
    (out, skipped)
}

/// Mean over ordered distinct pairs of usable rows of 1/4 − Ang(zᵢ, zⱼ)/(2π).
pub fn sign_proj<T: Scalar>(z: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<StatValue<T>> {
    if z.nrows() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: z.nrows() });
    }
    cfg.validate()?;
    let (units, _) = usable_units(z, cfg);
    let k = units.len();
    let total_pairs = (z.nrows() * (z.nrows() - 1)) as u64;
    if k < 2 {
        return Err(Error::AllTuplesTied);
    }
    let mut acc = PairwiseAcc::new();
    for a in 0..k {
        let mut s = T::zero();
        for b in (a + 1)..k {
            s = s + unit_angle(&units[a], &units[b]);
        }
        acc.push_partial(s);
    }
    let pairs = (k * (k - 1)) as u64;
    let mean_angle = T::c(2.0) * acc.total() / T::c(pairs as f64);
    Ok(StatValue {
        value: T::c(0.25) - mean_angle / (T::c(2.0) * T::PI()),
        kind: StatKind::SignProj,
        skipped_tuples: total_pairs - pairs,
    })
}
