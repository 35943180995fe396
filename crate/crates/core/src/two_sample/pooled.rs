use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{unit_angle, AngleConfig, NEAR_PARALLEL_COS};
use crate::matrix::{dot, sq_dist, SampleMatrix};
use crate::scalar::{PairwiseAcc, Scalar};

use super::gram::PooledGram;

/// Largest pooled size for which N×N Gram and distance matrices are cached.
pub const MATRIX_CACHE_MAX: usize = 2048;
/// Largest pooled size for which the N³ vertex-angle cube may be built.
pub const CUBE_MAX: usize = 160;

/// Pooled sample (x rows then y rows), centered at the pooled mean, with
/// lazily built caches shared by every statistic and every relabeling.
#[derive(Debug)]
pub struct PooledSample<T: Scalar> {
    z: SampleMatrix<T>,
    m: usize,
    n: usize,
    cfg: AngleConfig<T>,
    thr: T,
    tied: Option<Vec<bool>>,
    gram: OnceLock<PooledGram<T>>,
    dist: OnceLock<Vec<T>>,
    cube: Option<Vec<T>>,
    median_dist: OnceLock<T>,
    cache_matrices: bool,
}

impl<T: Scalar> PooledSample<T> {
    pub fn new(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let raw = x.stack(y)?;
        let nn = raw.nrows();
        let d = raw.ncols();
        let mut mean = vec![T::zero(); d];
        for r in raw.rows() {
            for (mu, &v) in mean.iter_mut().zip(r) {
                *mu = *mu + v;
            }
        }
        let nf = T::of_usize(nn.max(1));
        for mu in mean.iter_mut() {
            *mu = *mu / nf;
        }
        let z = raw.map_rows(d, |r, out| {
            for k in 0..d {
                out[k] = r[k] - mean[k];
            }
        });
        let thr = cfg.threshold(z.max_abs());
        let mut ps = PooledSample {
            z,
            m: x.nrows(),
            n: y.nrows(),
            cfg: *cfg,
            thr,
            tied: None,
            gram: OnceLock::new(),
            dist: OnceLock::new(),
            cube: None,
            median_dist: OnceLock::new(),
            cache_matrices: true,
        };
        ps.detect_ties();
        Ok(ps)
    }

    fn detect_ties(&mut self) {
        let nn = self.size();
        let thr2 = self.thr * self.thr;
        let mut tied: Option<Vec<bool>> = None;
        for a in 0..nn {
            for b in (a + 1)..nn {
                if sq_dist(self.z.row(a), self.z.row(b)) <= thr2 {
                    let t = tied.get_or_insert_with(|| vec![false; nn * nn]);
                    t[a * nn + b] = true;
                    t[b * nn + a] = true;
                }
            }
        }
        self.tied = tied;
    }

    /// Never build N×N matrices; every quantity is computed from coordinates.
    pub fn without_matrix_cache(mut self) -> Self {
        self.cache_matrices = false;
        self
    }

    /// Precompute the angle at every vertex for every pair of other rows.
    /// Makes each CvM evaluation a pure table lookup; used by permutation runs.
    pub fn with_angle_cube(mut self) -> Self {
        let nn = self.size();
        if nn > CUBE_MAX || self.dim() == 1 {
            return self;
        }
        let mut cube = vec![T::zero(); nn * nn * nn];
        for c in 0..nn {
            for a in 0..nn {
                if a == c || self.is_tied(a, c) {
                    continue;
                }
                for b in (a + 1)..nn {
                    if b == c || self.is_tied(b, c) {
                        continue;
                    }
                    let v = self.compute_angle(c, a, b);
                    cube[(c * nn + a) * nn + b] = v;
                    cube[(c * nn + b) * nn + a] = v;
                }
            }
        }
        self.cube = Some(cube);
        self
    }

    pub fn size(&self) -> usize {
        self.m + self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn angle_config(&self) -> &AngleConfig<T> {
        &self.cfg
    }

    /// Centered pooled coordinates.
    pub fn coords(&self) -> &SampleMatrix<T> {
        &self.z
    }

    /// Absolute tie threshold on ‖z_a − z_b‖.
    pub fn tie_threshold(&self) -> T {
        self.thr
    }

    pub fn has_ties(&self) -> bool {
        self.tied.is_some()
    }

    #[inline]
    pub fn is_tied(&self, a: usize, b: usize) -> bool {
        match &self.tied {
            None => false,
            Some(t) => a == b || t[a * self.size() + b],
        }
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (0..self.m).collect()
    }

    pub fn y_indices(&self) -> Vec<usize> {
        (self.m..self.size()).collect()
    }

    /// Gram matrix of the centered rows (only for N ≤ [`MATRIX_CACHE_MAX`]).
    pub fn gram(&self) -> Option<&PooledGram<T>> {
        if !self.cache_matrices || self.size() > MATRIX_CACHE_MAX {
            return None;
        }
        Some(self.gram.get_or_init(|| PooledGram::from_rows(&self.z)))
    }

    fn dist_matrix(&self) -> Option<&[T]> {
        if !self.cache_matrices || self.size() > MATRIX_CACHE_MAX {
            return None;
        }
        Some(self.dist.get_or_init(|| {
            let nn = self.size();
            let mut dm = vec![T::zero(); nn * nn];
            for a in 0..nn {
                for b in (a + 1)..nn {
                    let v = sq_dist(self.z.row(a), self.z.row(b)).sqrt();
                    dm[a * nn + b] = v;
                    dm[b * nn + a] = v;
                }
            }
            dm
        }))
    }

    /// Euclidean distance between pooled rows.
    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> T {
        match self.dist_matrix() {
            Some(dm) => dm[a * self.size() + b],
            None => sq_dist(self.z.row(a), self.z.row(b)).sqrt(),
        }
    }

    /// Median of the N(N−1)/2 pooled pairwise distances.
    pub fn median_distance(&self) -> T {
        *self.median_dist.get_or_init(|| {
            let nn = self.size();
            let mut ds = Vec::with_capacity(nn * (nn.saturating_sub(1)) / 2);
            for a in 0..nn {
                for b in (a + 1)..nn {
                    ds.push(self.dist(a, b));
                }
            }
            if ds.is_empty() {
                return T::zero();
            }
            ds.sort_by(|p, q| p.partial_cmp(q).expect("finite distances"));
            let k = ds.len();
            if k % 2 == 1 {
                ds[k / 2]
            } else {
                (ds[k / 2 - 1] + ds[k / 2]) / T::c(2.0)
            }
        })
    }

    fn compute_angle(&self, c: usize, a: usize, b: usize) -> T {
        // argument order fixed so that every path rounds identically
        let (a, b) = (a.min(b), a.max(b));
        let zc = self.z.row(c);
        let (za, zb) = (self.z.row(a), self.z.row(b));
        if self.dim() == 1 {
            return if (za[0] - zc[0]) * (zb[0] - zc[0]) >= T::zero() { T::zero() } else { T::PI() };
        }
        let (pa, pb) = (self.dist(a, c), self.dist(b, c));
        let ip = match self.gram() {
            Some(g) => g.diff_dot(a, c, b, c),
            None => {
                let mut s = T::zero();
                for k in 0..za.len() {
                    s = s + (za[k] - zc[k]) * (zb[k] - zc[k]);
                }
                s
            }
        };
        let cos = ip / (pa * pb);
        if cos.abs() <= T::c(NEAR_PARALLEL_COS) {
            return cos.acos();
        }
        self.precise_angle(c, a, b)
    }

    /// Half-angle formula on the unit difference vectors.
    fn precise_angle(&self, c: usize, a: usize, b: usize) -> T {
        let (a, b) = (a.min(b), a.max(b));
        let zc = self.z.row(c);
        let (za, zb) = (self.z.row(a), self.z.row(b));
        let (ia, ib) = (T::one() / self.dist(a, c), T::one() / self.dist(b, c));
        let (mut dm, mut dp) = (T::zero(), T::zero());
        for k in 0..za.len() {
            let u = (za[k] - zc[k]) * ia;
            let v = (zb[k] - zc[k]) * ib;
            dm = dm + (u - v) * (u - v);
            dp = dp + (u + v) * (u + v);
        }
        T::c(2.0) * dm.sqrt().atan2(dp.sqrt())
    }

    /// Angle at vertex `c` between z_a − z_c and z_b − z_c. Caller guarantees
    /// neither difference is tied.
    #[inline]
    pub fn vertex_angle(&self, c: usize, a: usize, b: usize) -> T {
        if let Some(cube) = &self.cube {
            let nn = self.size();
            return cube[(c * nn + a) * nn + b];
        }
        self.compute_angle(c, a, b)
    }

    /// Checked version of [`Self::vertex_angle`].
    pub fn try_vertex_angle(&self, c: usize, a: usize, b: usize) -> Result<T> {
        if self.is_tied(a, c) || self.is_tied(b, c) {
            return Err(Error::TieEncountered);
        }
        Ok(self.vertex_angle(c, a, b))
    }

    /// Σ over ordered distinct a, b in `group` of the angle at `c`.
    /// Requires that no member of `group` is tied with `c`.
    pub fn vertex_pair_sum(&self, c: usize, group: &[usize]) -> T {
        if self.dim() == 1 {
            let zc = self.z.row(c)[0];
            let below = group.iter().filter(|&&a| self.z.row(a)[0] < zc).count();
            let above = group.len() - below;
            return T::c(2.0) * T::PI() * T::of_usize(below) * T::of_usize(above);
        }
        let mut acc = PairwiseAcc::new();
        if let Some(cube) = &self.cube {
            let nn = self.size();
            for (k, &a) in group.iter().enumerate() {
                let row = &cube[(c * nn + a) * nn..(c * nn + a + 1) * nn];
                let mut s = T::zero();
                for &b in &group[k + 1..] {
                    s = s + row[b];
                }
                acc.push_partial(s);
            }
        } else if let Some(g) = self.gram() {
            let gcc = g.get(c, c);
            let w: Vec<T> = group.iter().map(|&a| g.get(a, c)).collect();
            let inv: Vec<T> = group.iter().map(|&a| T::one() / self.dist(a, c)).collect();
            let near = T::c(NEAR_PARALLEL_COS);
            for (k, &a) in group.iter().enumerate() {
                let ga = g.row(a);
                let mut s = T::zero();
                for l in (k + 1)..group.len() {
                    let cos = (ga[group[l]] - w[k] - w[l] + gcc) * inv[k] * inv[l];
                    s = s + if cos.abs() <= near { cos.acos() } else { self.precise_angle(c, a, group[l]) };
                }
                acc.push_partial(s);
            }
        } else {
            let d = self.dim();
            let zc = self.z.row(c);
            let mut units = vec![T::zero(); group.len() * d];
            for (k, &a) in group.iter().enumerate() {
                let za = self.z.row(a);
                let u = &mut units[k * d..(k + 1) * d];
                for j in 0..d {
                    u[j] = za[j] - zc[j];
                }
                let inv = T::one() / dot(u, u).sqrt();
                for v in u.iter_mut() {
                    *v = *v * inv;
                }
            }
            for k in 0..group.len() {
                let uk = &units[k * d..(k + 1) * d];
                let mut s = T::zero();
                for l in (k + 1)..group.len() {
                    s = s + unit_angle(uk, &units[l * d..(l + 1) * d]);
                }
                acc.push_partial(s);
            }
        }
        T::c(2.0) * acc.total()
    }
}
