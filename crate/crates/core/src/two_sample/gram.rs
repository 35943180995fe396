use crate::error::{Error, Result};
use crate::geometry::{angle_from_cos, AngleConfig};
use crate::matrix::{dot, SampleMatrix};
use crate::scalar::Scalar;

/// N×N matrix of inner products of the pooled rows (x rows first).
#[derive(Debug, Clone, PartialEq)]
pub struct PooledGram<T> {
    n: usize,
    dim: usize,
    g: Vec<T>,
}

impl<T: Scalar> PooledGram<T> {
    /// Gram matrix of the rows of `z`.
    pub fn from_rows(z: &SampleMatrix<T>) -> Self {
        let n = z.nrows();
        let mut g = vec![T::zero(); n * n];
        for a in 0..n {
            for b in a..n {
                let v = dot(z.row(a), z.row(b));
                g[a * n + b] = v;
                g[b * n + a] = v;
            }
        }
        PooledGram { n, dim: z.ncols(), g }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Dimension of the rows the matrix was built from.
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> T {
        self.g[a * self.n + b]
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[T] {
        &self.g[a * self.n..(a + 1) * self.n]
    }

    pub fn sq_norms(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// (z_a − z_b)ᵀ(z_c − z_e).
    #[inline]
    pub fn diff_dot(&self, a: usize, b: usize, c: usize, e: usize) -> T {
        self.get(a, c) - self.get(a, e) - self.get(b, c) + self.get(b, e)
    }

    /// ‖z_a − z_b‖², clamped at zero.
    #[inline]
    pub fn sq_dist(&self, a: usize, b: usize) -> T {
        (self.get(a, a) + self.get(b, b) - T::c(2.0) * self.get(a, b)).max(T::zero())
    }

    /// Angle at vertex `c` between z_a − z_c and z_b − z_c.
    pub fn vertex_angle(&self, c: usize, a: usize, b: usize, thr: T) -> Result<T> {
        let na = self.sq_dist(a, c).sqrt();
        let nb = self.sq_dist(b, c).sqrt();
        if na <= thr || nb <= thr {
            return Err(Error::TieEncountered);
        }
        let ip = self.diff_dot(a, c, b, c);
        if self.dim == 1 {
            return Ok(if ip >= T::zero() { T::zero() } else { T::PI() });
        }
        Ok(angle_from_cos(ip / (na * nb)))
    }
}

/// Raw (uncentered) Gram matrix of the pooled sample `x` then `y`.
pub fn pooled_gram<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>) -> Result<PooledGram<T>> {
    Ok(PooledGram::from_rows(&x.stack(y)?))
}

/// CvM kernel of order two on pooled indices:
/// 1/3 − Ang(x₁−y₁, x₂−y₁)/(2π) − Ang(y₁−x₁, y₂−x₁)/(2π).
pub fn h_cvm<T: Scalar>(x1: usize, x2: usize, y1: usize, y2: usize, gram: &PooledGram<T>, cfg: &AngleConfig<T>) -> Result<T> {
    let n = gram.size();
    if [x1, x2, y1, y2].iter().any(|&i| i >= n) {
        return Err(Error::InvalidConfig("pooled index out of range".into()));
    }
    let scale = (0..n).map(|i| gram.get(i, i)).fold(T::zero(), T::max).sqrt();
    let thr = cfg.threshold(scale);
    let two_pi = T::c(2.0) * T::PI();
    let a1 = gram.vertex_angle(y1, x1, x2, thr)?;
    let a2 = gram.vertex_angle(x1, y1, y2, thr)?;
    Ok(T::one() / T::c(3.0) - a1 / two_pi - a2 / two_pi)
}
