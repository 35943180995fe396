//! Projection-averaged dependence coefficients: multivariate Kendall's tau, the
//! Blum–Kiefer–Rosenblatt coefficient and τ*, with U-statistic estimators
//! (complete below a size cap, uniformly subsampled above) and permutation
//! independence tests that relabel y-rows against x-rows.

mod angles;
mod bkr;
mod kendall;
mod taustar;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AngleConfig;
use crate::matrix::SampleMatrix;
use crate::permutation::{exact_pvalue, mc_pvalue, perm_stream, PermConfig, PermResult};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Paired observations (Xᵢ, Yᵢ).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample<T> {
    x: SampleMatrix<T>,
    y: SampleMatrix<T>,
}

impl<T: Scalar> PairedSample<T> {
    pub fn new(x: SampleMatrix<T>, y: SampleMatrix<T>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::DimMismatch { left: x.nrows(), right: y.nrows() });
        }
        Ok(PairedSample { x, y })
    }

    /// Split each row of `z` into its first `p` columns (X) and the rest (Y).
    pub fn from_columns(z: &SampleMatrix<T>, p: usize) -> Result<Self> {
        let d = z.ncols();
        if p == 0 || p >= d {
            return Err(Error::InvalidConfig(format!("p must lie in 1..{d}, got {p}")));
        }
        let x = z.map_rows(p, |r, o| o.copy_from_slice(&r[..p]));
        let y = z.map_rows(d - p, |r, o| o.copy_from_slice(&r[p..]));
        Self::new(x, y)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &SampleMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &SampleMatrix<T> {
        &self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DepKind {
    KendallProj,
    BkrProj,
    TauStar,
}

impl DepKind {
    pub fn name(self) -> &'static str {
        match self {
            DepKind::KendallProj => "tau",
            DepKind::BkrProj => "bkr",
            DepKind::TauStar => "taustar",
        }
    }

    /// Number of distinct observations one kernel evaluation uses.
    pub fn degree(self) -> usize {
        match self {
            DepKind::BkrProj => 6,
            _ => 4,
        }
    }

    /// Largest n evaluated over all tuples by default.
    pub fn exact_cap(self) -> usize {
        match self {
            DepKind::BkrProj => 20,
            _ => 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepConfig<T> {
    pub angle: AngleConfig<T>,
    /// Complete enumeration iff n ≤ this (default: the kind's cap).
    pub exact_max: Option<usize>,
    /// Tuples drawn by the incomplete estimator.
    pub n_tuples: usize,
    /// Seed of the tuple sampler.
    pub seed: u64,
}

impl<T: Scalar> Default for DepConfig<T> {
    fn default() -> Self {
        DepConfig { angle: AngleConfig::default(), exact_max: None, n_tuples: 200_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepValue<T> {
    pub value: T,
    pub kind: DepKind,
    pub skipped_tuples: u64,
    /// Kernel evaluations averaged (ordered tuples in exact mode).
    pub used_tuples: u64,
    pub exact: bool,
}

/// n(n−1)⋯(n−k+1).
pub(crate) fn falling(n: usize, k: usize) -> u64 {
    (0..k).map(|i| n.saturating_sub(i) as u64).product()
}

pub(crate) enum Tuples {
    Exact,
    /// Uniformly drawn ordered tuples of distinct indices (first `degree` entries used).
    Sampled(Vec<[u32; 6]>),
}

fn sample_tuples(n: usize, k: usize, count: usize, rng: &mut RandomStream) -> Vec<[u32; 6]> {
    (0..count)
        .map(|_| {
            let mut t = [0u32; 6];
            let mut filled = 0;
            while filled < k {
                let v = rng.below(n) as u32;
                if !t[..filled].contains(&v) {
                    t[filled] = v;
                    filled += 1;
                }
            }
            t
        })
        .collect()
}

/// Estimator with all y-independent work done once; `eval(perm)` pairs Xᵢ with Y_{perm[i]}.
pub(crate) trait Evaluator<T>: Sync {
    fn eval(&self, perm: &[usize]) -> Result<DepValue<T>>;
}

fn evaluator<T: Scalar>(s: &PairedSample<T>, kind: DepKind, cfg: &DepConfig<T>) -> Result<Box<dyn Evaluator<T>>> {
    cfg.angle.validate()?;
    let n = s.n();
    if n < kind.degree() {
        return Err(Error::TooFewSamples { need: kind.degree(), got: n });
    }
    let tuples = if n <= cfg.exact_max.unwrap_or(kind.exact_cap()) {
        Tuples::Exact
    } else {
        if cfg.n_tuples == 0 {
            return Err(Error::InvalidConfig("n_tuples must be positive".into()));
        }
        Tuples::Sampled(sample_tuples(n, kind.degree(), cfg.n_tuples, &mut RandomStream::new(cfg.seed)))
    };
    Ok(match kind {
        DepKind::KendallProj => Box::new(kendall::Kendall::new(s, &cfg.angle, &tuples)),
        DepKind::BkrProj => Box::new(bkr::Bkr::new(s, &cfg.angle, &tuples)),
        DepKind::TauStar => Box::new(taustar::TauStar::new(s, &cfg.angle, &tuples)),
    })
}

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn dependence<T: Scalar>(s: &PairedSample<T>, kind: DepKind, cfg: &DepConfig<T>) -> Result<DepValue<T>> {
    evaluator(s, kind, cfg)?.eval(&identity(s.n()))
}

/// E[(2 − (2/π)Ang(X₁−X₂, X₃−X₄))(2 − (2/π)Ang(Y₁−Y₂, Y₃−Y₄))] − 1.
pub fn kendall_tau_proj<T: Scalar>(s: &PairedSample<T>, cfg: &DepConfig<T>) -> Result<DepValue<T>> {
    dependence(s, DepKind::KendallProj, cfg)
}

/// E[o(X₁,X₂;X₃)o(Y₁,Y₂;Y₄)] + E[o(X₁,X₂;X₅)o(Y₃,Y₄;Y₆)] − 2E[o(X₁,X₂;X₄)o(Y₁,Y₃;Y₅)]
/// with o(a, b; c) = 1/2 − Ang(a − c, b − c)/(2π).
pub fn bkr_proj<T: Scalar>(s: &PairedSample<T>, cfg: &DepConfig<T>) -> Result<DepValue<T>> {
    dependence(s, DepKind::BkrProj, cfg)
}

/// Projection-averaged τ*; equals the sign-kernel τ* when p = q = 1.
pub fn taustar_proj<T: Scalar>(s: &PairedSample<T>, cfg: &DepConfig<T>) -> Result<DepValue<T>> {
    dependence(s, DepKind::TauStar, cfg)
}

/// All permutations of 0..n in lexicographic order.
fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p = identity(n);
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// Largest n whose n! relabelings are enumerated in exact mode.
const EXACT_PERM_MAX: usize = 8;

/// Permutation test of independence: relabel the y-rows, keep the x-rows.
/// When no tuple is usable for the observed data the statistic is undefined and
/// the test returns p = 1. A relabeling whose tuples are all tied counts as at
/// least the observed value.
pub fn indep_perm_test<T: Scalar>(s: &PairedSample<T>, kind: DepKind, dep: &DepConfig<T>, cfg: &PermConfig) -> Result<PermResult<T>> {
    cfg.validate()?;
    let ev = evaluator(s, kind, dep)?;
    let n = s.n();
    let obs = match ev.eval(&identity(n)) {
        Ok(v) => v,
        Err(Error::AllTuplesTied) => {
            return Ok(PermResult {
                observed: T::zero(),
                p_value: 1.0,
                permuted_values: None,
                reject: false,
                seed: cfg.master_seed,
                n_perms: cfg.n_perms,
                exact: false,
                skipped_tuples: falling(n, kind.degree()),
            })
        }
        Err(e) => return Err(e),
    };
    let value = |perm: &[usize]| match ev.eval(perm) {
        Ok(v) => Ok(v.value),
        Err(Error::AllTuplesTied) => Ok(T::infinity()),
        Err(e) => Err(e),
    };
    let exact = cfg.exact && n <= EXACT_PERM_MAX;
    let vals: Vec<T> = if exact {
        all_permutations(n).par_iter().map(|p| value(p)).collect::<Result<_>>()?
    } else {
        (0..cfg.n_perms as u64)
            .into_par_iter()
            .map(|b| {
                let mut p = identity(n);
                perm_stream(cfg.master_seed, b).shuffle(&mut p);
                value(&p)
            })
            .collect::<Result<_>>()?
    };
    let p_value = if exact { exact_pvalue(obs.value, &vals) } else { mc_pvalue(obs.value, &vals) };
    Ok(PermResult {
        observed: obs.value,
        p_value,
        reject: p_value <= cfg.alpha,
        seed: cfg.master_seed,
        n_perms: vals.len(),
        permuted_values: Some(vals),
        exact,
        skipped_tuples: obs.skipped_tuples,
    })
}
