//! Distribution samplers for the simulation designs.

use nalgebra::{Cholesky, DMatrix};
use rand_distr::{Cauchy, ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::rng::RandomStream;

/// Location vector, resolved against the dimension at sampling time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSpec {
    Zero,
    /// Every coordinate equal to the value.
    Constant(f64),
    /// The value in the first d/2 coordinates, zero in the rest.
    FirstHalf(f64),
    Vector(Vec<f64>),
}

impl Default for MeanSpec {
    fn default() -> Self {
        MeanSpec::Zero
    }
}

impl MeanSpec {
    pub fn resolve(&self, d: usize) -> Result<Vec<f64>> {
        Ok(match self {
            MeanSpec::Zero => vec![0.0; d],
            MeanSpec::Constant(c) => vec![*c; d],
            MeanSpec::FirstHalf(c) => (0..d).map(|i| if i < d / 2 { *c } else { 0.0 }).collect(),
            MeanSpec::Vector(v) => {
                if v.len() != d {
                    return Err(Error::BadStructure(format!("mean has {} entries, d = {d}", v.len())));
                }
                v.clone()
            }
        })
    }
}

/// Covariance (or shape) matrix structure with unit diagonal unless dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovStructure {
    Identity,
    /// 1 on the diagonal, 0.6 at lag 1, 0.3 at lag 2.
    Banded,
    /// 0.2^|i−j|.
    Auto,
    /// 5×5 diagonal blocks with off-diagonal 0.2.
    Block,
    /// 1 on the diagonal, ρ elsewhere.
    Equicorrelated(f64),
    Dense(Vec<Vec<f64>>),
}

impl Default for CovStructure {
    fn default() -> Self {
        CovStructure::Identity
    }
}

impl CovStructure {
    /// The d×d matrix; `None` for the identity.
    pub fn matrix(&self, d: usize) -> Result<Option<DMatrix<f64>>> {
        let m = match self {
            CovStructure::Identity => return Ok(None),
            CovStructure::Banded => DMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
                0 => 1.0,
                1 => 0.6,
                2 => 0.3,
                _ => 0.0,
            }),
            CovStructure::Auto => DMatrix::from_fn(d, d, |i, j| 0.2f64.powi(i.abs_diff(j) as i32)),
            CovStructure::Block => {
                if d % 5 != 0 {
                    return Err(Error::BadStructure(format!("block covariance needs 5 | d, got d = {d}")));
                }
                DMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        1.0
                    } else if i / 5 == j / 5 {
                        0.2
                    } else {
                        0.0
                    }
                })
            }
            CovStructure::Equicorrelated(rho) => DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { *rho }),
            CovStructure::Dense(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::BadStructure(format!("dense covariance must be {d}×{d}")));
                }
                let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
                if (0..d).any(|i| (0..i).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * m[(i, j)].abs().max(1.0))) {
                    return Err(Error::BadStructure("dense covariance is not symmetric".into()));
                }
                m
            }
        };
        Ok(Some(m))
    }

    /// Lower Cholesky factor; `None` for the identity.
    pub fn factor(&self, d: usize) -> Result<Option<DMatrix<f64>>> {
        match self.matrix(d)? {
            None => Ok(None),
            Some(m) => Cholesky::new(m)
                .map(|c| Some(c.l()))
                .ok_or_else(|| Error::BadStructure("covariance is not positive definite".into())),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Declarative description of a sampling distribution on ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// mean + sd·L·z with LLᵀ the structured covariance.
    MvNormal {
        #[serde(default)]
        mean: MeanSpec,
        #[serde(default)]
        cov: CovStructure,
        #[serde(default = "one")]
        sd: f64,
    },
    /// i.i.d. Cauchy(gamma, s) coordinates.
    MvCauchy { gamma: f64, s: f64 },
    /// mu + L·z / sqrt(W/df) with W ~ χ²(df).
    MvT {
        #[serde(default)]
        mu: MeanSpec,
        df: f64,
        #[serde(default)]
        shape: CovStructure,
    },
    /// Each row comes from `contaminant` with probability eps, else from `base`.
    Contaminated { base: Box<DistributionSpec>, contaminant: Box<DistributionSpec>, eps: f64 },
}

impl DistributionSpec {
    pub fn standard_normal() -> Self {
        DistributionSpec::MvNormal { mean: MeanSpec::Zero, cov: CovStructure::Identity, sd: 1.0 }
    }

    /// Resolve against a dimension: validates parameters and factors covariances once.
    pub fn sampler(&self, d: usize) -> Result<Sampler> {
        if d == 0 {
            return Err(Error::BadStructure("d must be at least 1".into()));
        }
        let kind = match self {
            DistributionSpec::MvNormal { mean, cov, sd } => {
                if !(*sd > 0.0 && sd.is_finite()) {
                    return Err(Error::BadStructure(format!("sd must be positive, got {sd}")));
                }
                SamplerKind::Normal { mean: mean.resolve(d)?, l: cov.factor(d)?, sd: *sd }
            }
            DistributionSpec::MvCauchy { gamma, s } => {
                SamplerKind::Cauchy(Cauchy::new(*gamma, *s).map_err(|e| Error::BadStructure(format!("cauchy: {e}")))?)
            }
            DistributionSpec::MvT { mu, df, shape } => {
                if !(*df >= 1.0 && df.is_finite()) {
                    return Err(Error::BadStructure(format!("df must be at least 1, got {df}")));
                }
                let chi = ChiSquared::new(*df).map_err(|e| Error::BadStructure(format!("chi-square: {e}")))?;
                SamplerKind::T { mu: mu.resolve(d)?, l: shape.factor(d)?, df: *df, chi }
            }
            DistributionSpec::Contaminated { base, contaminant, eps } => {
                if !(0.0..1.0).contains(eps) {
                    return Err(Error::BadStructure(format!("eps must lie in [0, 1), got {eps}")));
                }
                SamplerKind::Mixture { base: Box::new(base.sampler(d)?), contaminant: Box::new(contaminant.sampler(d)?), eps: *eps }
            }
        };
        Ok(Sampler { d, kind })
    }
}

/// A distribution resolved for a fixed dimension.
#[derive(Debug, Clone)]
pub struct Sampler {
    d: usize,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Normal { mean: Vec<f64>, l: Option<DMatrix<f64>>, sd: f64 },
    Cauchy(Cauchy<f64>),
    T { mu: Vec<f64>, l: Option<DMatrix<f64>>, df: f64, chi: ChiSquared<f64> },
    Mixture { base: Box<Sampler>, contaminant: Box<Sampler>, eps: f64 },
}

/// out = L·z (or z for the identity), with z standard normal.
fn correlated(l: &Option<DMatrix<f64>>, z: &mut [f64], out: &mut [f64]) {
    match l {
        None => out.copy_from_slice(z),
        Some(l) => {
            let d = z.len();
            for i in 0..d {
                let mut s = 0.0;
                for j in 0..=i {
                    s += l[(i, j)] * z[j];
                }
                out[i] = s;
            }
        }
    }
}

impl Sampler {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Write one draw into `out`.
    pub fn draw_into(&self, rng: &mut RandomStream, z: &mut [f64], out: &mut [f64]) {
        match &self.kind {
            SamplerKind::Normal { mean, l, sd } => {
                z.iter_mut().for_each(|v| *v = rng.gaussian());
                correlated(l, z, out);
                for (o, m) in out.iter_mut().zip(mean) {
                    *o = m + sd * *o;
                }
            }
            SamplerKind::Cauchy(c) => out.iter_mut().for_each(|v| *v = c.sample(rng.rng())),
            SamplerKind::T { mu, l, df, chi } => {
                z.iter_mut().for_each(|v| *v = rng.gaussian());
                correlated(l, z, out);
                let w = (chi.sample(rng.rng()) / df).sqrt();
                for (o, m) in out.iter_mut().zip(mu) {
                    *o = m + *o / w;
                }
            }
            SamplerKind::Mixture { base, contaminant, eps } => {
                if rng.uniform() < *eps {
                    contaminant.draw_into(rng, z, out)
                } else {
                    base.draw_into(rng, z, out)
                }
            }
        }
    }

    /// n i.i.d. rows.
    pub fn sample(&self, n: usize, rng: &mut RandomStream) -> Result<SampleMatrix<f64>> {
        let d = self.d;
        let mut data = vec![0.0; n * d];
        let mut z = vec![0.0; d];
        for row in data.chunks_mut(d) {
            self.draw_into(rng, &mut z, row);
        }
        SampleMatrix::new(data, n, d)
    }
}

/// n i.i.d. draws from `dist` in dimension d.
pub fn sample(dist: &DistributionSpec, n: usize, d: usize, rng: &mut RandomStream) -> Result<SampleMatrix<f64>> {
    dist.sampler(d)?.sample(n, rng)
}
