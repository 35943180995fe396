use rayon::prelude::*;

use crate::geometry::{unit_angle, AngleConfig};
use crate::matrix::{dot, SampleMatrix};
use crate::scalar::Scalar;

/// Pair-of-pairs angle tables are built up to this many observations.
pub(crate) const TABLE_MAX: usize = 60;

/// Angles between pair differences z_a − z_b and z_c − z_e of one sample.
/// Tied differences yield NaN, which propagates into every kernel that uses them.
pub(crate) struct Diffs<T> {
    n: usize,
    z: SampleMatrix<T>,
    thr: T,
    /// angle table over unordered pairs of pairs (a < b, c < e)
    table: Option<Vec<T>>,
}

impl<T: Scalar> Diffs<T> {
    pub fn new(z: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Self {
        Self::build(z, cfg, z.nrows() <= TABLE_MAX)
    }

    fn build(z: &SampleMatrix<T>, cfg: &AngleConfig<T>, with_table: bool) -> Self {
        let n = z.nrows();
        let thr = cfg.threshold(z.max_abs());
        let mut out = Diffs { n, z: z.clone(), thr, table: None };
        if with_table {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
            let units: Vec<Option<Vec<T>>> = pairs.iter().map(|&(a, b)| out.unit(a, b)).collect();
            let np = pairs.len();
            let table = (0..np * np)
                .into_par_iter()
                .map(|k| match (&units[k / np], &units[k % np]) {
                    (Some(u), Some(v)) => unit_angle(u, v),
                    _ => T::nan(),
                })
                .collect();
            out.table = Some(table);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unit vector of z_a − z_b, or None when tied.
    fn unit(&self, a: usize, b: usize) -> Option<Vec<T>> {
        let u: Vec<T> = self.z.row(a).iter().zip(self.z.row(b)).map(|(&p, &q)| p - q).collect();
        let nu = dot(&u, &u).sqrt();
        (nu > self.thr).then(|| u.iter().map(|&v| v / nu).collect())
    }

    #[inline]
    fn pair(&self, a: usize, b: usize) -> usize {
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// Ang(z_a − z_b, z_c − z_e); requires a ≠ b and c ≠ e.
    #[inline]
    pub fn ang(&self, a: usize, b: usize, c: usize, e: usize) -> T {
        let ((a, b), fp) = if a < b { ((a, b), false) } else { ((b, a), true) };
        let ((c, e), fq) = if c < e { ((c, e), false) } else { ((e, c), true) };
        let v = match &self.table {
            Some(t) => t[self.pair(a, b) * (self.n * (self.n - 1) / 2) + self.pair(c, e)],
            None => match (self.unit(a, b), self.unit(c, e)) {
                (Some(u), Some(v)) => unit_angle(&u, &v),
                _ => T::nan(),
            },
        };
        if fp != fq {
            T::PI() - v
        } else {
            v
        }
    }

    /// 1/2 − Ang(z_a − z_c, z_b − z_c)/(2π): the half-space pair measure at vertex c.
    #[inline]
    pub fn orth2(&self, a: usize, b: usize, c: usize) -> T {
        T::c(0.5) - self.ang(a, c, b, c) / (T::c(2.0) * T::PI())
    }

    /// g(U₁, U₂, U₃) = 1/2 − (1/4π)[Ang(U₁,U₂) + Ang(U₁,U₃) + Ang(U₂,U₃)] for
    /// U₁ = z_a − z_b, U₂ = z_c − z_e, U₃ = z_f − z_g.
    #[inline]
    pub fn g3(&self, u1: (usize, usize), u2: (usize, usize), u3: (usize, usize)) -> T {
        let s = self.ang(u1.0, u1.1, u2.0, u2.1) + self.ang(u1.0, u1.1, u3.0, u3.1) + self.ang(u2.0, u2.1, u3.0, u3.1);
        T::c(0.5) - s / (T::c(4.0) * T::PI())
    }

    /// h(Z₁,Z₂,Z₃,Z₄) at indices (i, j, k, l).
    #[inline]
    pub fn h4(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.g3((i, j), (j, k), (k, l)) + self.g3((j, i), (i, k), (k, l)) + self.g3((i, j), (j, l), (l, k)) + self.g3((j, i), (i, l), (l, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::orthant3;
    use crate::rng::RandomStream;

    #[test]
    fn table_and_direct_paths_agree() {
        let mut r = RandomStream::new(1);
        let mut z = SampleMatrix::from_fn(9, 3, |_, _| r.gaussian()).unwrap();
        // a tied pair
        let row = z.row(0).to_vec();
        z = SampleMatrix::from_fn(9, 3, |i, k| if i == 4 { row[k] } else { z.row(i)[k] }).unwrap();
        let cfg = AngleConfig::default();
        let (t, d) = (Diffs::build(&z, &cfg, true), Diffs::build(&z, &cfg, false));
        for a in 0..9 {
            for b in 0..9 {
                for c in 0..9 {
                    for e in 0..9 {
                        if a == b || c == e {
                            continue;
                        }
                        let (u, v) = (t.ang(a, b, c, e), d.ang(a, b, c, e));
                        assert!(u == v || (u.is_nan() && v.is_nan()));
                        assert_eq!(u.is_nan(), (a == 0 && b == 4) || (a == 4 && b == 0) || (c == 0 && e == 4) || (c == 4 && e == 0));
                    }
                }
            }
        }
    }

    #[test]
    fn g_is_the_three_vector_orthant() {
        let mut r = RandomStream::new(2);
        let z = SampleMatrix::from_fn(6, 4, |_, _| r.gaussian()).unwrap();
        let dz = Diffs::new(&z, &AngleConfig::default());
        let diff = |a: usize, b: usize| -> Vec<f64> { z.row(a).iter().zip(z.row(b)).map(|(p, q)| p - q).collect() };
        let g = dz.g3((0, 1), (2, 3), (4, 5));
        let o = orthant3(&diff(0, 1), &diff(2, 3), &diff(4, 5), &AngleConfig::default()).unwrap();
        assert!((g - o).abs() <= 1e-15);
        assert_eq!(dz.g3((0, 1), (0, 1), (0, 1)), 0.5);
    }
}
