use crate::error::{Error, Result};
use crate::scalar::{PairwiseAcc, Scalar};

use super::angles::Diffs;
use super::{DepKind, DepValue, Evaluator, PairedSample, Tuples};
use crate::geometry::AngleConfig;

/// Projection-averaged Kendall's tau:
/// E[(2 − (2/π)Ang(X₁−X₂, X₃−X₄))(2 − (2/π)Ang(Y₁−Y₂, Y₃−Y₄))] − 1.
pub(crate) struct Kendall<T> {
    dy: Diffs<T>,
    /// (i₁, i₂, i₃, i₄) with Ang(X_{i₁}−X_{i₂}, X_{i₃}−X_{i₄})/π
    items: Vec<([u32; 4], T)>,
    /// ordered tuples each item stands for
    weight: u64,
    exact: bool,
}

impl<T: Scalar> Kendall<T> {
    pub fn new(s: &PairedSample<T>, cfg: &AngleConfig<T>, tuples: &Tuples) -> Self {
        let dx = Diffs::new(s.x(), cfg);
        let dy = Diffs::new(s.y(), cfg);
        let item = |t: [u32; 4]| (t, dx.ang(t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize) / T::PI());
        match tuples {
            Tuples::Exact => {
                // one item per unordered pair of disjoint unordered pairs; it stands for
                // the 8 ordered tuples obtained by orienting and swapping the pairs
                let n = s.n() as u32;
                let mut items = Vec::new();
                for a in 0..n {
                    for b in (a + 1)..n {
                        for c in (a + 1)..n {
                            for e in (c + 1)..n {
                                if c == b || e == b {
                                    continue;
                                }
                                items.push(item([a, b, c, e]));
                            }
                        }
                    }
                }
                Kendall { dy, items, weight: 8, exact: true }
            }
            Tuples::Sampled(list) => Kendall { dy, items: list.iter().map(|t| item([t[0], t[1], t[2], t[3]])).collect(), weight: 1, exact: false },
        }
    }
}

impl<T: Scalar> Evaluator<T> for Kendall<T> {
    fn eval(&self, perm: &[usize]) -> Result<DepValue<T>> {
        let (one, two) = (T::one(), T::c(2.0));
        let mut acc = PairwiseAcc::new();
        let mut used = 0u64;
        for &(t, s) in &self.items {
            let p = |k: usize| perm[t[k] as usize];
            let u = self.dy.ang(p(0), p(1), p(2), p(3)) / T::PI();
            if s.is_nan() || u.is_nan() {
                continue;
            }
            let k = if self.exact {
                // mean over the four orientations
                two * ((one - s) * (one - u) + s * u) - one
            } else {
                (two - two * s) * (two - two * u) - one
            };
            acc.add(k);
            used += 1;
        }
        if used == 0 {
            return Err(Error::AllTuplesTied);
        }
        let total = self.items.len() as u64;
        Ok(DepValue {
            value: acc.total() / T::c(used as f64),
            kind: DepKind::KendallProj,
            skipped_tuples: (total - used) * self.weight,
            used_tuples: used * self.weight,
            exact: self.exact,
        })
    }
}
