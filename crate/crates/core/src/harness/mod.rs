//! Simulation harness: declarative power experiments over the two-sample
//! statistics, CSV ingestion and worker-pool sizing.

pub mod dist;
pub mod io;

use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AngleConfig;
use crate::permutation::{perm_pvalues, prepare_pooled, PermConfig};
use crate::rng::RandomStream;
use crate::two_sample::{MmdConfig, StatKind, Statistic};

pub use dist::{sample, CovStructure, DistributionSpec, MeanSpec, Sampler};
pub use io::{parse_csv, read_csv};

/// Environment variable capping the worker count (0 or unset = all cores).
pub const THREADS_ENV: &str = "PROJCVM_THREADS";

/// Worker count from the value of [`THREADS_ENV`]; 0 means automatic.
pub fn parse_threads(value: Option<&str>) -> Result<usize> {
    match value.map(str::trim) {
        None | Some("") => Ok(0),
        Some(s) => s.parse().map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got {s:?}"))),
    }
}

/// Worker count requested through [`THREADS_ENV`].
pub fn threads_from_env() -> Result<usize> {
    parse_threads(std::env::var(THREADS_ENV).ok().as_deref())
}

/// Run `f` on a pool of `threads` workers (0 = all cores).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn default_alpha() -> f64 {
    0.05
}

/// One simulation cell: both distributions, sizes, replication counts and methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub x_dist: DistributionSpec,
    pub y_dist: DistributionSpec,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub reps: usize,
    /// Permutations per test.
    #[serde(rename = "B", alias = "perms")]
    pub perms: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: Vec<StatKind>,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must not be empty".into()));
        }
        if self.m < 2 || self.n < 2 {
            return Err(Error::TooFewSamples { need: 2, got: self.m.min(self.n) });
        }
        for k in &self.methods {
            statistic(*k)?;
        }
        PermConfig { n_perms: self.perms, alpha: self.alpha, master_seed: 0, exact: false }.validate()
    }

    /// Stream of replication `rep`; x, y and permutation streams derive from it.
    pub fn rep_stream(&self, rep: usize) -> RandomStream {
        RandomStream::new(self.master_seed).derive(rep as u64)
    }
}

/// Statistic used by the harness for a method name.
pub fn statistic(kind: StatKind) -> Result<Statistic<f64>> {
    Ok(match kind {
        StatKind::CvM => Statistic::Cvm,
        StatKind::CvM3 => Statistic::Cvm3,
        StatKind::CvMLinear => Statistic::CvmLinear,
        StatKind::Energy => Statistic::Energy,
        StatKind::Mmd => Statistic::Mmd(MmdConfig::default()),
        StatKind::Cq => Statistic::Cq,
        StatKind::Wmw => Statistic::Wmw,
        StatKind::SignProj => return Err(Error::InvalidConfig("sign is a one-sample statistic; not available in two-sample experiments".into())),
    })
}

/// Per-method outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub p_values: Vec<f64>,
    pub elapsed_ms: Vec<f64>,
}

/// Empirical power of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPower {
    pub method: StatKind,
    pub rejections: usize,
    pub rate: f64,
    /// sqrt(rate(1 − rate)/reps).
    pub se: f64,
    /// Mean wall time per test; `None` when timing is stripped.
    pub mean_runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub spec: ExperimentSpec,
    pub methods: Vec<MethodPower>,
}

impl PowerReport {
    /// Drop wall-clock fields so that the report depends on the spec only.
    pub fn without_timing(mut self) -> Self {
        for m in &mut self.methods {
            m.mean_runtime_ms = None;
        }
        self
    }

    pub fn rate(&self, kind: StatKind) -> Option<f64> {
        self.methods.iter().find(|m| m.method == kind).map(|m| m.rate)
    }
}

/// Draw replication `rep` and test it with every method on one shared pooled sample.
pub fn run_rep(spec: &ExperimentSpec, xs: &Sampler, ys: &Sampler, rep: usize) -> Result<RepOutcome> {
    let stream = spec.rep_stream(rep);
    let x = xs.sample(spec.m, &mut stream.derive(0))?;
    let y = ys.sample(spec.n, &mut stream.derive(1))?;
    let perm_seed = stream.derive(2).next_u64();
    let stats = spec.methods.iter().map(|k| statistic(*k)).collect::<Result<Vec<_>>>()?;
    let ps = prepare_pooled(&x, &y, &stats, &AngleConfig::default())?;
    let cfg = PermConfig { n_perms: spec.perms, alpha: spec.alpha, master_seed: perm_seed, exact: false };
    let mut out = RepOutcome { p_values: Vec::with_capacity(stats.len()), elapsed_ms: Vec::with_capacity(stats.len()) };
    for s in &stats {
        let t = Instant::now();
        let r = perm_pvalues(&ps, std::slice::from_ref(s), &cfg)?;
        out.elapsed_ms.push(t.elapsed().as_secs_f64() * 1e3);
        out.p_values.push(r[0].p_value);
    }
    Ok(out)
}

/// Empirical rejection rates of every method over `spec.reps` replications.
pub fn run_power(spec: &ExperimentSpec) -> Result<PowerReport> {
    spec.validate()?;
    let xs = spec.x_dist.sampler(spec.d)?;
    let ys = spec.y_dist.sampler(spec.d)?;
    let reps = (0..spec.reps).into_par_iter().map(|r| run_rep(spec, &xs, &ys, r)).collect::<Result<Vec<_>>>()?;
    let nr = spec.reps as f64;
    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let rejections = reps.iter().filter(|r| r.p_values[k] <= spec.alpha).count();
            let rate = rejections as f64 / nr;
            MethodPower {
                method,
                rejections,
                rate,
                se: (rate * (1.0 - rate) / nr).sqrt(),
                mean_runtime_ms: Some(reps.iter().map(|r| r.elapsed_ms[k]).sum::<f64>() / nr),
            }
        })
        .collect();
    Ok(PowerReport { spec: spec.clone(), methods })
}
