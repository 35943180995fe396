use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point type the statistics are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumCast + Sum + Send + Sync + Debug + Display + Default + 'static
{
    /// Lossy conversion from `f64`; constants and sampled data go through here.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count fits the scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (tree) summation. Error grows like O(log n) instead of O(n).
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = T::zero();
        for &x in xs {
            s = s + x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Streaming pairwise accumulator: keeps a stack of partial sums of
/// power-of-two sized blocks, so memory is O(log n).
#[derive(Debug, Clone)]
pub struct PairwiseAcc<T> {
    block: T,
    block_len: usize,
    stack: Vec<(T, u32)>,
}

impl<T: Scalar> Default for PairwiseAcc<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> PairwiseAcc<T> {
    pub fn new() -> Self {
        PairwiseAcc { block: T::zero(), block_len: 0, stack: Vec::new() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        self.block = self.block + x;
        self.block_len += 1;
        if self.block_len == PAIRWISE_BLOCK {
            self.push_partial(self.block);
            self.block = T::zero();
            self.block_len = 0;
        }
    }

    /// Add an already reduced partial sum as one leaf.
    pub fn push_partial(&mut self, mut s: T) {
        let mut level = 0u32;
        while let Some(&(top, l)) = self.stack.last() {
            if l != level {
                break;
            }
            self.stack.pop();
            s = top + s;
            level += 1;
        }
        self.stack.push((s, level));
    }

    pub fn total(&self) -> T {
        let mut s = self.block;
        for &(p, _) in self.stack.iter().rev() {
            s = p + s;
        }
        s
    }
}
