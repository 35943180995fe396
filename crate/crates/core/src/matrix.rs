use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major n×d matrix of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix<T> {
    data: Vec<T>,
    n: usize,
    d: usize,
}

impl<T: Scalar> SampleMatrix<T> {
    pub fn new(data: Vec<T>, n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if data.len() != n * d {
            return Err(Error::DimMismatch { left: data.len(), right: n * d });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SampleMatrix { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimMismatch { left: r.len(), right: d });
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), d)
    }

    /// One-dimensional sample.
    pub fn from_column(xs: &[T]) -> Result<Self> {
        Self::new(xs.to_vec(), xs.len(), 1)
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                data.push(f(i, j));
            }
        }
        Self::new(data, n, d)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.d)
    }

    /// Rows picked by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        SampleMatrix { data, n: idx.len(), d: self.d }
    }

    /// Stack `self` on top of `other`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimMismatch { left: self.d, right: other.d });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(SampleMatrix { data, n: self.n + other.n, d: self.d })
    }

    /// Apply `f` to every row, producing a matrix with `d_out` columns.
    pub fn map_rows(&self, d_out: usize, mut f: impl FnMut(&[T], &mut [T])) -> Self {
        let mut data = vec![T::zero(); self.n * d_out];
        for i in 0..self.n {
            f(self.row(i), &mut data[i * d_out..(i + 1) * d_out]);
        }
        SampleMatrix { data, n: self.n, d: d_out }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    pub fn cast<U: Scalar>(&self) -> SampleMatrix<U> {
        SampleMatrix {
            data: self.data.iter().map(|&v| U::c(v.as_f64())).collect(),
            n: self.n,
            d: self.d,
        }
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s = s + x * y;
    }
    s
}

#[inline]
pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let t = x - y;
        s = s + t * t;
    }
    s
}
