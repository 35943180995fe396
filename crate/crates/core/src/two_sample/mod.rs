//! Two-sample statistics: projection-averaged CvM (order-two and order-three
//! kernels, linear-time variant), energy, Gaussian MMD, CQ, spatial-rank WMW,
//! and the one-sample projection-averaged sign statistic.

pub mod cvm;
pub mod gram;
pub mod others;
pub mod pooled;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::AngleConfig;
use crate::matrix::SampleMatrix;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

pub use gram::{h_cvm, pooled_gram, PooledGram};
pub use pooled::PooledSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKind {
    #[serde(rename = "cvm")]
    CvM,
    #[serde(rename = "cvm3")]
    CvM3,
    #[serde(rename = "lcvm")]
    CvMLinear,
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "mmd")]
    Mmd,
    #[serde(rename = "cq")]
    Cq,
    #[serde(rename = "wmw")]
    Wmw,
    #[serde(rename = "sign")]
    SignProj,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::CvM => "cvm",
            StatKind::CvM3 => "cvm3",
            StatKind::CvMLinear => "lcvm",
            StatKind::Energy => "energy",
            StatKind::Mmd => "mmd",
            StatKind::Cq => "cq",
            StatKind::Wmw => "wmw",
            StatKind::SignProj => "sign",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatValue<T> {
    pub value: T,
    pub kind: StatKind,
    /// Kernel tuples excluded because of tied observations.
    pub skipped_tuples: u64,
}

/// Gaussian-kernel scale ς² in exp(−‖·‖²/(2ς²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth<T> {
    Fixed(T),
    /// ς = median pooled pairwise distance.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmdConfig<T> {
    pub bandwidth: Bandwidth<T>,
}

impl<T> Default for MmdConfig<T> {
    fn default() -> Self {
        MmdConfig { bandwidth: Bandwidth::Median }
    }
}

/// A two-sample statistic that can be evaluated on any split of a pooled sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic<T> {
    Cvm,
    Cvm3,
    /// Blocks are formed in the order of the supplied indices.
    CvmLinear,
    Energy,
    Mmd(MmdConfig<T>),
    Cq,
    Wmw,
}

impl<T: Scalar> Statistic<T> {
    pub fn kind(&self) -> StatKind {
        match self {
            Statistic::Cvm => StatKind::CvM,
            Statistic::Cvm3 => StatKind::CvM3,
            Statistic::CvmLinear => StatKind::CvMLinear,
            Statistic::Energy => StatKind::Energy,
            Statistic::Mmd(_) => StatKind::Mmd,
            Statistic::Cq => StatKind::Cq,
            Statistic::Wmw => StatKind::Wmw,
        }
    }

    pub fn evaluate(&self, ps: &PooledSample<T>, xs: &[usize], ys: &[usize]) -> Result<StatValue<T>> {
        match self {
            Statistic::Cvm => cvm::cvm(ps, xs, ys),
            Statistic::Cvm3 => cvm::cvm_third_order(ps, xs, ys),
            Statistic::CvmLinear => cvm::cvm_linear_blocks(ps, xs, ys),
            Statistic::Energy => others::energy(ps, xs, ys),
            Statistic::Mmd(c) => others::mmd(ps, xs, ys, c),
            Statistic::Cq => others::cq(ps, xs, ys),
            Statistic::Wmw => others::wmw(ps, xs, ys),
        }
    }

    /// Whether evaluation order of the index sets matters.
    pub fn order_sensitive(&self) -> bool {
        matches!(self, Statistic::CvmLinear)
    }
}

fn on_pooled<T: Scalar>(
    x: &SampleMatrix<T>,
    y: &SampleMatrix<T>,
    cfg: &AngleConfig<T>,
    f: impl FnOnce(&PooledSample<T>, &[usize], &[usize]) -> Result<StatValue<T>>,
) -> Result<StatValue<T>> {
    let ps = PooledSample::new(x, y, cfg)?;
    f(&ps, &ps.x_indices(), &ps.y_indices())
}

/// CvM U-statistic over ordered distinct pairs (i₁≠i₂, j₁≠j₂).
pub fn u_cvm<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, cfg, cvm::cvm)
}

pub fn u_cvm_third_order<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, cfg, cvm::cvm_third_order)
}

/// Linear-time CvM statistic; `rng` shuffles both samples before blocking.
pub fn l_cvm<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &AngleConfig<T>, rng: &mut RandomStream) -> Result<StatValue<T>> {
    on_pooled(x, y, cfg, |ps, xs, ys| cvm::cvm_linear(ps, xs, ys, rng))
}

pub fn u_energy<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, &AngleConfig::default(), others::energy)
}

pub fn u_mmd<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &MmdConfig<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, &AngleConfig::default(), |ps, xs, ys| others::mmd(ps, xs, ys, cfg))
}

pub fn u_cq<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, &AngleConfig::default(), others::cq)
}

pub fn u_wmw<T: Scalar>(x: &SampleMatrix<T>, y: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<StatValue<T>> {
    on_pooled(x, y, cfg, others::wmw)
}

/// One-sample projection-averaged sign statistic.
pub fn u_sign_proj<T: Scalar>(z: &SampleMatrix<T>, cfg: &AngleConfig<T>) -> Result<StatValue<T>> {
    others::sign_proj(z, cfg)
}
