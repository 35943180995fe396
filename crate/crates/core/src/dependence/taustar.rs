use crate::error::{Error, Result};
use crate::geometry::AngleConfig;
use crate::scalar::{PairwiseAcc, Scalar};

use super::angles::Diffs;
use super::{DepKind, DepValue, Evaluator, PairedSample, Tuples};

/// Full y-side tables are built up to this many observations.
pub(crate) const KY_TABLE_MAX: usize = 40;

/// h(1234) + h(3412) − 2h(1324).
#[inline]
fn ky<T: Scalar>(d: &Diffs<T>, i: usize, j: usize, k: usize, l: usize) -> T {
    d.h4(i, j, k, l) + d.h4(k, l, i, j) - T::c(2.0) * d.h4(i, k, j, l)
}

/// [`ky`] averaged over swapping the first two and the last two indices, the
/// symmetries of h.
#[inline]
fn ky_sym<T: Scalar>(d: &Diffs<T>, i: usize, j: usize, k: usize, l: usize) -> T {
    (ky(d, i, j, k, l) + ky(d, j, i, k, l) + ky(d, i, j, l, k) + ky(d, j, i, l, k)) / T::c(4.0)
}

/// Projection-averaged τ*: the mean over ordered distinct 4-tuples of
/// 4·h_p(X₁₂₃₄)[h_q(Y₁₂₃₄) + h_q(Y₃₄₁₂) − 2h_q(Y₁₃₂₄)].
pub(crate) struct TauStar<T> {
    dy: Diffs<T>,
    /// (i, j, k, l) with h_p(X_i, X_j, X_k, X_l)
    items: Vec<([u32; 4], T)>,
    /// symmetrized y kernel over all index 4-tuples (exact mode, small n)
    table: Option<Vec<T>>,
    n: usize,
    weight: u64,
    exact: bool,
}

impl<T: Scalar> TauStar<T> {
    pub fn new(s: &PairedSample<T>, cfg: &AngleConfig<T>, tuples: &Tuples) -> Self {
        let n = s.n();
        let dx = Diffs::new(s.x(), cfg);
        let dy = Diffs::new(s.y(), cfg);
        let item = |t: [u32; 4]| (t, dx.h4(t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize));
        match tuples {
            Tuples::Exact => {
                // h is symmetric under (12) and (34): one item per i < j, k < l
                let mut items = Vec::new();
                for i in 0..n as u32 {
                    for j in (i + 1)..n as u32 {
                        for k in 0..n as u32 {
                            for l in (k + 1)..n as u32 {
                                if k != i && k != j && l != i && l != j {
                                    items.push(item([i, j, k, l]));
                                }
                            }
                        }
                    }
                }
                let table = (n <= KY_TABLE_MAX).then(|| sym_table(&dy, n));
                TauStar { dy, items, table, n, weight: 4, exact: true }
            }
            Tuples::Sampled(list) => {
                let items = list.iter().map(|t| item([t[0], t[1], t[2], t[3]])).collect();
                TauStar { dy, items, table: None, n, weight: 1, exact: false }
            }
        }
    }
}

fn sym_table<T: Scalar>(d: &Diffs<T>, n: usize) -> Vec<T> {
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let distinct = |i: usize, j: usize, k: usize, l: usize| i != j && i != k && i != l && j != k && j != l && k != l;
    let mut h = vec![T::nan(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if distinct(i, j, k, l) {
                        h[idx(i, j, k, l)] = d.h4(i, j, k, l);
                    }
                }
            }
        }
    }
    let two = T::c(2.0);
    let kyt = |i: usize, j: usize, k: usize, l: usize| h[idx(i, j, k, l)] + h[idx(k, l, i, j)] - two * h[idx(i, k, j, l)];
    let mut out = vec![T::nan(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if distinct(i, j, k, l) {
                        out[idx(i, j, k, l)] = (kyt(i, j, k, l) + kyt(j, i, k, l) + kyt(i, j, l, k) + kyt(j, i, l, k)) / T::c(4.0);
                    }
                }
            }
        }
    }
    out
}

impl<T: Scalar> Evaluator<T> for TauStar<T> {
    fn eval(&self, perm: &[usize]) -> Result<DepValue<T>> {
        let n = self.n;
        let mut acc = PairwiseAcc::new();
        let mut used = 0u64;
        for &(t, hx) in &self.items {
            if hx.is_nan() {
                continue;
            }
            let p = |k: usize| perm[t[k] as usize];
            let k = match (&self.table, self.exact) {
                (Some(tab), _) => tab[((p(0) * n + p(1)) * n + p(2)) * n + p(3)],
                (None, true) => ky_sym(&self.dy, p(0), p(1), p(2), p(3)),
                (None, false) => ky(&self.dy, p(0), p(1), p(2), p(3)),
            };
            if k.is_nan() {
                continue;
            }
            acc.add(hx * k);
            used += 1;
        }
        if used == 0 {
            return Err(Error::AllTuplesTied);
        }
        let total = self.items.len() as u64;
        Ok(DepValue {
            value: T::c(4.0) * acc.total() / T::c(used as f64),
            kind: DepKind::TauStar,
            skipped_tuples: (total - used) * self.weight,
            used_tuples: used * self.weight,
            exact: self.exact,
        })
    }
}
