//! Permutation calibration: Monte-Carlo p-values (1 + #{permuted ≥ observed})/(B + 1),
//! exact enumeration of label splits for tiny pools, sign-flip calibration of the
//! one-sample sign statistic, and the d = 1 limiting null series.

mod null;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unit_angle, AngleConfig};
use crate::matrix::SampleMatrix;
use crate::rng::RandomStream;
use crate::scalar::{PairwiseAcc, Scalar};
use crate::two_sample::others::usable_units;
use crate::two_sample::{cvm, PooledSample, StatValue, Statistic};

pub use null::{d1_eigenvalue, null_quantile_d1, NullQuantiles};

/// Largest number of label splits enumerated in exact mode.
pub const EXACT_SPLIT_LIMIT: u128 = 50_000;

/// Tag of the stream that orders the observed sample for order-sensitive statistics.
const OBSERVED_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermConfig {
    pub n_perms: usize,
    pub alpha: f64,
    pub master_seed: u64,
    /// Enumerate every label split when there are at most [`EXACT_SPLIT_LIMIT`].
    pub exact: bool,
}

impl Default for PermConfig {
    fn default() -> Self {
        PermConfig { n_perms: 199, alpha: 0.05, master_seed: 0, exact: false }
    }
}

impl PermConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_perms < 1 {
            return Err(Error::InvalidConfig("n_perms must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermResult<T> {
    pub observed: T,
    pub p_value: f64,
    /// Statistic values in permutation order (Monte-Carlo) or split order (exact).
    pub permuted_values: Option<Vec<T>>,
    pub reject: bool,
    pub seed: u64,
    /// B in Monte-Carlo mode, the number of label splits in exact mode.
    pub n_perms: usize,
    pub exact: bool,
    /// Tuples skipped by the observed statistic.
    pub skipped_tuples: u64,
}

/// Whether `v` counts as at least `observed`. Values equal up to rounding count.
#[inline]
pub fn at_least<T: Scalar>(v: T, observed: T) -> bool {
    let tol = 1e-12 * observed.as_f64().abs().max(1.0);
    v.as_f64() >= observed.as_f64() - tol
}

/// (1 + #{vᵦ ≥ observed})/(B + 1).
pub fn mc_pvalue<T: Scalar>(observed: T, permuted: &[T]) -> f64 {
    let k = permuted.iter().filter(|&&v| at_least(v, observed)).count();
    (1 + k) as f64 / (permuted.len() + 1) as f64
}

/// #{splits with value ≥ observed}/#splits; the observed split is among them.
pub fn exact_pvalue<T: Scalar>(observed: T, all_splits: &[T]) -> f64 {
    let k = all_splits.iter().filter(|&&v| at_least(v, observed)).count();
    k as f64 / all_splits.len() as f64
}

/// Stream of permutation `b`; independent of thread scheduling and of the method set.
pub fn perm_stream(master_seed: u64, b: u64) -> RandomStream {
    RandomStream::new(master_seed).derive(b)
}

/// C(n, k), saturating at u128::MAX.
pub fn n_splits(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Every k-subset of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn complement(n: usize, xs: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &i in xs {
        mark[i] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

/// Pool the samples, with angle tables when CvM statistics will be evaluated repeatedly.
pub fn prepare_pooled<T: Scalar>(
    x: &SampleMatrix<T>,
    y: &SampleMatrix<T>,
    stats: &[Statistic<T>],
    cfg: &AngleConfig<T>,
) -> Result<PooledSample<T>> {
    let ps = PooledSample::new(x, y, cfg)?;
    if stats.iter().any(|s| matches!(s, Statistic::Cvm | Statistic::Cvm3)) {
        return Ok(ps.with_angle_cube());
    }
    Ok(ps)
}

fn observe<T: Scalar>(ps: &PooledSample<T>, stat: &Statistic<T>, seed: u64) -> Result<StatValue<T>> {
    let (xs, ys) = (ps.x_indices(), ps.y_indices());
    if stat.order_sensitive() {
        let mut r = RandomStream::new(seed).derive(OBSERVED_TAG);
        return cvm::cvm_linear(ps, &xs, &ys, &mut r);
    }
    stat.evaluate(ps, &xs, &ys)
}

/// One random relabeling: (x indices, y indices) in shuffled order.
fn random_split(nn: usize, m: usize, r: &mut RandomStream) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..nn).collect();
    r.shuffle(&mut idx);
    let ys = idx.split_off(m);
    (idx, ys)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Permutation p-value of one statistic.
pub fn perm_pvalue<T: Scalar>(
    x: &SampleMatrix<T>,
    y: &SampleMatrix<T>,
    stat: &Statistic<T>,
    angle: &AngleConfig<T>,
    cfg: &PermConfig,
) -> Result<PermResult<T>> {
    let ps = prepare_pooled(x, y, std::slice::from_ref(stat), angle)?;
    Ok(perm_pvalues(&ps, std::slice::from_ref(stat), cfg)?.remove(0))
}

/// Permutation p-values of several statistics on shared relabelings of one pooled sample.
pub fn perm_pvalues<T: Scalar>(ps: &PooledSample<T>, stats: &[Statistic<T>], cfg: &PermConfig) -> Result<Vec<PermResult<T>>> {
    cfg.validate()?;
    let observed = stats.iter().map(|s| observe(ps, s, cfg.master_seed)).collect::<Result<Vec<_>>>()?;
    let (nn, m) = (ps.size(), ps.m());
    let exact = cfg.exact && !stats.iter().any(|s| s.order_sensitive()) && n_splits(nn, m) <= EXACT_SPLIT_LIMIT;
    let rows: Vec<Vec<T>> = if exact {
        combinations(nn, m)
            .into_par_iter()
            .map(|xs| {
                let ys = complement(nn, &xs);
                stats.iter().map(|s| Ok(s.evaluate(ps, &xs, &ys)?.value)).collect::<Result<Vec<T>>>()
            })
            .collect::<Result<_>>()?
    } else {
        (0..cfg.n_perms as u64)
            .into_par_iter()
            .map(|b| {
                let (px, py) = random_split(nn, m, &mut perm_stream(cfg.master_seed, b));
                let (sx, sy) = (sorted(&px), sorted(&py));
                stats
                    .iter()
                    .map(|s| {
                        let v = if s.order_sensitive() { s.evaluate(ps, &px, &py)? } else { s.evaluate(ps, &sx, &sy)? };
                        Ok(v.value)
                    })
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<_>>()?
    };
    Ok(observed
        .iter()
        .enumerate()
        .map(|(k, obs)| {
            let vals: Vec<T> = rows.iter().map(|r| r[k]).collect();
            let p_value = if exact { exact_pvalue(obs.value, &vals) } else { mc_pvalue(obs.value, &vals) };
            PermResult {
                observed: obs.value,
                p_value,
                reject: p_value <= cfg.alpha,
                seed: cfg.master_seed,
                n_perms: vals.len(),
                permuted_values: Some(vals),
                exact,
                skipped_tuples: obs.skipped_tuples,
            }
        })
        .collect())
}

/// Sorted statistic values over all C(N, m) label splits.
pub fn exact_perm_distribution<T: Scalar>(
    x: &SampleMatrix<T>,
    y: &SampleMatrix<T>,
    stat: &Statistic<T>,
    angle: &AngleConfig<T>,
) -> Result<Vec<T>> {
    let splits = n_splits(x.nrows() + y.nrows(), x.nrows());
    if splits > EXACT_SPLIT_LIMIT {
        return Err(Error::TooManySplits { splits, limit: EXACT_SPLIT_LIMIT });
    }
    if stat.order_sensitive() {
        return Err(Error::InvalidConfig("exact enumeration needs an order-free statistic".into()));
    }
    let ps = prepare_pooled(x, y, std::slice::from_ref(stat), angle)?;
    let cfg = PermConfig { exact: true, ..PermConfig::default() };
    let mut vals = perm_pvalues(&ps, std::slice::from_ref(stat), &cfg)?.remove(0).permuted_values.unwrap_or_default();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
    Ok(vals)
}

/// Sign statistic under the sign flips s ∈ {±1}ⁿ of the usable rows.
struct SignFlips<T> {
    angles: Vec<T>,
    k: usize,
}

impl<T: Scalar> SignFlips<T> {
    fn new(units: &[Vec<T>]) -> Self {
        let k = units.len();
        let mut angles = vec![T::zero(); k * k];
        for a in 0..k {
            for b in (a + 1)..k {
                let v = unit_angle(&units[a], &units[b]);
                angles[a * k + b] = v;
                angles[b * k + a] = v;
            }
        }
        SignFlips { angles, k }
    }

    fn value(&self, signs: &[bool]) -> T {
        let k = self.k;
        let mut acc = PairwiseAcc::new();
        for a in 0..k {
            let row = &self.angles[a * k..(a + 1) * k];
            let mut s = T::zero();
            for b in (a + 1)..k {
                s = s + if signs[a] == signs[b] { row[b] } else { T::PI() - row[b] };
            }
            acc.push_partial(s);
        }
        let mean = T::c(2.0) * acc.total() / T::of_usize(k * (k - 1));
        T::c(0.25) - mean / (T::c(2.0) * T::PI())
    }
}

/// Sign-flip p-value of the one-sample sign statistic (H₀: z symmetric about 0).
pub fn sign_flip_pvalue<T: Scalar>(z: &SampleMatrix<T>, angle: &AngleConfig<T>, cfg: &PermConfig) -> Result<PermResult<T>> {
    cfg.validate()?;
    let obs = crate::two_sample::u_sign_proj(z, angle)?;
    let (units, _) = usable_units(z, angle);
    let flips = SignFlips::new(&units);
    let k = units.len();
    let observed = flips.value(&vec![true; k]);
    let vals: Vec<T> = (0..cfg.n_perms as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = perm_stream(cfg.master_seed, b);
            let signs: Vec<bool> = (0..k).map(|_| r.uniform() < 0.5).collect();
            flips.value(&signs)
        })
        .collect();
    let p_value = mc_pvalue(observed, &vals);
    Ok(PermResult {
        observed,
        p_value,
        reject: p_value <= cfg.alpha,
        seed: cfg.master_seed,
        n_perms: vals.len(),
        permuted_values: Some(vals),
        exact: false,
        skipped_tuples: obs.skipped_tuples,
    })
}
