use crate::error::{Error, Result};
use crate::geometry::AngleConfig;
use crate::scalar::{PairwiseAcc, Scalar};

use super::angles::Diffs;
use super::{falling, DepKind, DepValue, Evaluator, PairedSample, Tuples};

/// O[(a·n + b)·n + c] = 1/2 − Ang(z_a − z_c, z_b − z_c)/(2π) for distinct a, b, c,
/// split into a value table (0 where tied) and a validity indicator.
fn vertex_tables<T: Scalar>(d: &Diffs<T>) -> (Vec<T>, Vec<T>) {
    let n = d.n();
    let mut val = vec![T::zero(); n * n * n];
    let mut ind = vec![T::zero(); n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || a == c || b == c {
                    continue;
                }
                let v = d.orth2(a, b, c);
                if !v.is_nan() {
                    val[(a * n + b) * n + c] = v;
                    ind[(a * n + b) * n + c] = T::one();
                }
            }
        }
    }
    (val, ind)
}

/// Aggregates of a y-side table g used by the inclusion–exclusion sums.
pub(crate) struct YAgg<T> {
    n: usize,
    g: Vec<T>,
    total: T,
    /// Σ over distinct triples containing v
    m1: Vec<T>,
    /// Σ over distinct triples containing both v and w
    m2: Vec<T>,
    /// row[a·n + b] = Σ_e g(a, b, e)
    row: Vec<T>,
    /// col[a·n + e] = Σ_c g(a, c, e)
    col: Vec<T>,
    /// first[a] = Σ_{c,e} g(a, c, e)
    first: Vec<T>,
}

impl<T: Scalar> YAgg<T> {
    fn new(g: Vec<T>, n: usize) -> Self {
        let mut m1 = vec![T::zero(); n];
        let mut m2 = vec![T::zero(); n * n];
        let mut row = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n * n];
        let mut first = vec![T::zero(); n];
        let mut total = T::zero();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = g[(a * n + b) * n + c];
                    if v == T::zero() {
                        continue;
                    }
                    total = total + v;
                    for k in [a, b, c] {
                        m1[k] = m1[k] + v;
                    }
                    for (p, q) in [(a, b), (a, c), (b, c)] {
                        m2[p * n + q] = m2[p * n + q] + v;
                        m2[q * n + p] = m2[q * n + p] + v;
                    }
                    row[a * n + b] = row[a * n + b] + v;
                    col[a * n + c] = col[a * n + c] + v;
                    first[a] = first[a] + v;
                }
            }
        }
        YAgg { n, g, total, m1, m2, row, col, first }
    }

    #[inline]
    fn at(&self, a: usize, b: usize, c: usize) -> T {
        self.g[(a * self.n + b) * self.n + c]
    }

    /// Σ over the 6 orderings of {a, b, c}.
    fn all_orders(&self, a: usize, b: usize, c: usize) -> T {
        self.at(a, b, c) + self.at(b, a, c) + self.at(a, c, b) + self.at(c, a, b) + self.at(b, c, a) + self.at(c, b, a)
    }
}

/// (S₁, S₂, S₃): sums over distinct index tuples of
/// f(1,2,3)g(1,2,4), f(1,2,5)g(3,4,6) and f(1,2,4)g(1,3,5), with y relabeled by `perm`.
fn term_sums<T: Scalar>(f: &[T], y: &YAgg<T>, perm: &[usize]) -> [T; 3] {
    let n = y.n;
    let (mut s1, mut s2, mut s3) = (PairwiseAcc::new(), PairwiseAcc::new(), PairwiseAcc::new());
    for a in 0..n {
        let pa = perm[a];
        let (mut r1, mut r2, mut r3) = (T::zero(), T::zero(), T::zero());
        for b in 0..n {
            if b == a {
                continue;
            }
            let pb = perm[b];
            let base = (a * n + b) * n;
            let mut fsum = T::zero();
            let mut overlap = T::zero();
            for c in 0..n {
                let v = f[base + c];
                if v == T::zero() {
                    continue;
                }
                let pc = perm[c];
                fsum = fsum + v;
                overlap = overlap + v * y.at(pa, pb, pc);
                // disjoint y-triples: everything minus those meeting {a, b, c}
                let free = y.total - y.m1[pa] - y.m1[pb] - y.m1[pc] + y.m2[pa * n + pb] + y.m2[pa * n + pc] + y.m2[pb * n + pc]
                    - y.all_orders(pa, pb, pc);
                r2 = r2 + v * free;
                // (a, b, c) plays (1, 2, 4); y pairs (c′, e′) must avoid b and c
                let avoid = y.first[pa] - y.row[pa * n + pb] - y.col[pa * n + pb] - y.row[pa * n + pc] - y.col[pa * n + pc]
                    + y.at(pa, pb, pc)
                    + y.at(pa, pc, pb);
                r3 = r3 + v * avoid;
            }
            r1 = r1 + fsum * y.row[pa * n + pb] - overlap;
        }
        s1.push_partial(r1);
        s2.push_partial(r2);
        s3.push_partial(r3);
    }
    [s1.total(), s2.total(), s3.total()]
}

/// Projection-averaged Blum–Kiefer–Rosenblatt coefficient, as the sum of three
/// U-statistics of degrees 4, 6 and 5. Each term skips its own tied tuples.
pub(crate) enum Bkr<T> {
    Exact { fx: Vec<T>, ix: Vec<T>, gy: YAgg<T>, iy: YAgg<T>, n: usize },
    Sampled { dx: Diffs<T>, dy: Diffs<T>, tuples: Vec<[u32; 6]> },
}

impl<T: Scalar> Bkr<T> {
    pub fn new(s: &PairedSample<T>, cfg: &AngleConfig<T>, tuples: &Tuples) -> Self {
        let dx = Diffs::new(s.x(), cfg);
        let dy = Diffs::new(s.y(), cfg);
        match tuples {
            Tuples::Exact => {
                let n = s.n();
                let (fx, ix) = vertex_tables(&dx);
                let (g, ig) = vertex_tables(&dy);
                Bkr::Exact { fx, ix, gy: YAgg::new(g, n), iy: YAgg::new(ig, n), n }
            }
            Tuples::Sampled(list) => Bkr::Sampled { dx, dy, tuples: list.clone() },
        }
    }
}

fn combine<T: Scalar>(sums: [T; 3], counts: [u64; 3], totals: [u64; 3], exact: bool) -> Result<DepValue<T>> {
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::AllTuplesTied);
    }
    let m = |k: usize| sums[k] / T::c(counts[k] as f64);
    Ok(DepValue {
        value: m(0) + m(1) - T::c(2.0) * m(2),
        kind: DepKind::BkrProj,
        skipped_tuples: (0..3).map(|k| totals[k] - counts[k]).sum(),
        used_tuples: counts.iter().sum(),
        exact,
    })
}

impl<T: Scalar> Evaluator<T> for Bkr<T> {
    fn eval(&self, perm: &[usize]) -> Result<DepValue<T>> {
        match self {
            Bkr::Exact { fx, ix, gy, iy, n } => {
                let sums = term_sums(fx, gy, perm);
                let cnt = term_sums(ix, iy, perm);
                let counts = cnt.map(|c| c.as_f64().round() as u64);
                combine(sums, counts, [falling(*n, 4), falling(*n, 6), falling(*n, 5)], true)
            }
            Bkr::Sampled { dx, dy, tuples } => {
                let mut acc = [PairwiseAcc::new(), PairwiseAcc::new(), PairwiseAcc::new()];
                let mut counts = [0u64; 3];
                for t in tuples {
                    let i = |k: usize| t[k - 1] as usize;
                    let j = |k: usize| perm[t[k - 1] as usize];
                    let terms = [
                        dx.orth2(i(1), i(2), i(3)) * dy.orth2(j(1), j(2), j(4)),
                        dx.orth2(i(1), i(2), i(5)) * dy.orth2(j(3), j(4), j(6)),
                        dx.orth2(i(1), i(2), i(4)) * dy.orth2(j(1), j(3), j(5)),
                    ];
                    for k in 0..3 {
                        if !terms[k].is_nan() {
                            acc[k].add(terms[k]);
                            counts[k] += 1;
                        }
                    }
                }
                let len = tuples.len() as u64;
                let [a, b, c] = acc;
                combine([a.total(), b.total(), c.total()], counts, [len; 3], false)
            }
        }
    }
}
