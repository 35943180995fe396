use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::scalar::{PairwiseAcc, Scalar};

use super::pooled::PooledSample;
use super::{StatKind, StatValue};

fn falling2(k: usize) -> u64 {
    (k as u64) * (k.saturating_sub(1) as u64)
}

fn falling3(k: usize) -> u64 {
    falling2(k) * (k.saturating_sub(2) as u64)
}

fn need(k: usize, got: usize) -> Result<()> {
    if got < k {
        return Err(Error::TooFewSamples { need: k, got });
    }
    Ok(())
}

/// Second-order CvM U-statistic on the split (`xs`, `ys`) of the pooled rows.
pub fn cvm<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    need(2, xs.len().min(ys.len()))?;
    if ps.has_ties() {
        return cvm_with_ties(ps, xs, ys);
    }
    let (m, n) = (xs.len(), ys.len());
    let mut sy = PairwiseAcc::new();
    for &c in ys {
        sy.push_partial(ps.vertex_pair_sum(c, xs));
    }
    let mut sx = PairwiseAcc::new();
    for &c in xs {
        sx.push_partial(ps.vertex_pair_sum(c, ys));
    }
    let total = T::of_usize(n - 1) * sy.total() + T::of_usize(m - 1) * sx.total();
    let norm = T::c((falling2(m) * falling2(n)) as f64);
    let value = T::one() / T::c(3.0) - total / (T::c(2.0) * T::PI() * norm);
    Ok(StatValue { value, kind: StatKind::CvM, skipped_tuples: 0 })
}

/// Tie-aware evaluation. A tuple (i₁,i₂,j₁,j₂) is kept iff x_{i₁}−y_{j₁},
/// x_{i₂}−y_{j₁} and x_{i₁}−y_{j₂} are all non-zero.
fn cvm_with_ties<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    let (m, n) = (xs.len(), ys.len());
    // rc[i] = #{j : x_i − y_j usable}, cc[j] = #{i : x_i − y_j usable}
    let mut rc = vec![0usize; m];
    let mut cc = vec![0usize; n];
    for (i, &a) in xs.iter().enumerate() {
        for (j, &b) in ys.iter().enumerate() {
            if !ps.is_tied(a, b) {
                rc[i] += 1;
                cc[j] += 1;
            }
        }
    }
    let mut valid: u64 = 0;
    for (i, &a) in xs.iter().enumerate() {
        for (j, &b) in ys.iter().enumerate() {
            if !ps.is_tied(a, b) {
                valid += (rc[i] as u64 - 1) * (cc[j] as u64 - 1);
            }
        }
    }
    let skipped = falling2(m) * falling2(n) - valid;
    if valid == 0 {
        return Err(Error::AllTuplesTied);
    }
    let mut acc = PairwiseAcc::new();
    // angles at a y vertex, weighted by the number of admissible j₂
    for &c in ys.iter() {
        let mut s = T::zero();
        for (i1, &a) in xs.iter().enumerate() {
            if ps.is_tied(a, c) {
                continue;
            }
            for (i2, &b) in xs.iter().enumerate().skip(i1 + 1) {
                if ps.is_tied(b, c) {
                    continue;
                }
                let w = rc[i1] + rc[i2] - 2;
                if w > 0 {
                    s = s + ps.vertex_angle(c, a, b) * T::of_usize(w);
                }
            }
        }
        acc.push_partial(s);
    }
    // angles at an x vertex, weighted by the number of admissible i₂
    for &c in xs.iter() {
        let mut s = T::zero();
        for (j1, &a) in ys.iter().enumerate() {
            if ps.is_tied(a, c) {
                continue;
            }
            for (j2, &b) in ys.iter().enumerate().skip(j1 + 1) {
                if ps.is_tied(b, c) {
                    continue;
                }
                let w = cc[j1] + cc[j2] - 2;
                if w > 0 {
                    s = s + ps.vertex_angle(c, a, b) * T::of_usize(w);
                }
            }
        }
        acc.push_partial(s);
    }
    let vf = T::c(valid as f64);
    let value = T::one() / T::c(3.0) - acc.total() / (T::c(2.0) * T::PI() * vf);
    Ok(StatValue { value, kind: StatKind::CvM, skipped_tuples: skipped })
}

/// Kernel h on pooled indices; `None` when a required difference is tied.
pub fn kernel<T: Scalar>(ps: &PooledSample<T>, x1: usize, x2: usize, y1: usize, y2: usize) -> Option<T> {
    if ps.is_tied(x1, y1) || ps.is_tied(x2, y1) || ps.is_tied(x1, y2) {
        return None;
    }
    let two_pi = T::c(2.0) * T::PI();
    Some(T::one() / T::c(3.0) - ps.vertex_angle(y1, x1, x2) / two_pi - ps.vertex_angle(x1, y1, y2) / two_pi)
}

/// Third-order representation: average of h* over distinct triples from each
/// sample. O(m³n³); meant for validating [`cvm`].
pub fn cvm_third_order<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    need(3, xs.len().min(ys.len()))?;
    let half = T::c(0.5);
    let two_pi = T::c(2.0) * T::PI();
    // ∫ 1(βᵀ(a − c) ≤ 0) 1(βᵀ(b − c) ≤ 0) dλ(β); a == b gives the half-space measure.
    let o = |c: usize, a: usize, b: usize| -> Option<T> {
        if ps.is_tied(a, c) || ps.is_tied(b, c) {
            return None;
        }
        if a == b {
            return Some(half);
        }
        Some(half - ps.vertex_angle(c, a, b) / two_pi)
    };
    // E[(1(x₁≤v) − 1(y₁≤v))(1(x₂≤v) − 1(y₂≤v))] at vertex v
    let term = |v: usize, x1: usize, x2: usize, y1: usize, y2: usize| -> Option<T> {
        Some(o(v, x1, x2)? - o(v, x1, y2)? - o(v, y1, x2)? + o(v, y1, y2)?)
    };
    let mut acc = PairwiseAcc::new();
    let mut used: u64 = 0;
    let mut skipped: u64 = 0;
    for &x1 in xs {
        for &x2 in xs {
            for &x3 in xs {
                if x1 == x2 || x1 == x3 || x2 == x3 {
                    continue;
                }
                let mut s = T::zero();
                for &y1 in ys {
                    for &y2 in ys {
                        for &y3 in ys {
                            if y1 == y2 || y1 == y3 || y2 == y3 {
                                continue;
                            }
                            match (term(x3, x1, x2, y1, y2), term(y3, x1, x2, y1, y2)) {
                                (Some(a), Some(b)) => {
                                    s = s + half * (a + b);
                                    used += 1;
                                }
                                _ => skipped += 1,
                            }
                        }
                    }
                }
                acc.push_partial(s);
            }
        }
    }
    if used == 0 {
        return Err(Error::AllTuplesTied);
    }
    debug_assert_eq!(used + skipped, falling3(xs.len()) * falling3(ys.len()));
    Ok(StatValue { value: acc.total() / T::c(used as f64), kind: StatKind::CvM3, skipped_tuples: skipped })
}

/// Linear-time statistic: mean of the symmetrized kernel over disjoint blocks
/// (x_{2i−1}, x_{2i}; y_{2i−1}, y_{2i}) of the given index order.
pub fn cvm_linear_blocks<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
    if xs.len() != ys.len() {
        return Err(Error::UnequalSizes { m: xs.len(), n: ys.len() });
    }
    need(4, xs.len())?;
    let blocks = xs.len() / 2;
    let mut acc = PairwiseAcc::new();
    let mut used: u64 = 0;
    let mut skipped: u64 = 0;
    for i in 0..blocks {
        let (xa, xb, ya, yb) = (xs[2 * i], xs[2 * i + 1], ys[2 * i], ys[2 * i + 1]);
        for h in [kernel(ps, xa, xb, ya, yb), kernel(ps, xb, xa, yb, ya)] {
            match h {
                Some(v) => {
                    acc.add(v);
                    used += 1;
                }
                None => skipped += 1,
            }
        }
    }
    if used == 0 {
        return Err(Error::AllTuplesTied);
    }
    Ok(StatValue { value: acc.total() / T::c(used as f64), kind: StatKind::CvMLinear, skipped_tuples: skipped })
}

/// Shuffle both samples with `rng`, then block.
pub fn cvm_linear<T: Scalar>(ps: &PooledSample<T>, xs: &[usize], ys: &[usize], rng: &mut RandomStream) -> Result<StatValue<T>> {
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    rng.shuffle(&mut xs);
    rng.shuffle(&mut ys);
    cvm_linear_blocks(ps, &xs, &ys)
}
