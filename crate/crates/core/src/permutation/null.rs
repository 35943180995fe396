use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

const CHUNK: usize = 8192;

/// k-th eigenvalue of the centered d = 1 null kernel 1/3 − max(s,t) + (s² + t²)/2
/// on [0,1]: 1/(kπ)².
pub fn d1_eigenvalue(k: usize) -> f64 {
    let a = k as f64 * std::f64::consts::PI;
    1.0 / (a * a)
}

/// Empirical law of (ϑ_X ϑ_Y)⁻¹ Σ_{k ≤ K} λ_k (ξ_k² − 1), the limit of N·U_CvM
/// under H₀ in d = 1.
#[derive(Debug, Clone)]
pub struct NullQuantiles {
    draws: Vec<f64>,
}

impl NullQuantiles {
    /// Inverse empirical distribution function at `p` ∈ (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.draws.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.draws[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }

    /// Sorted draws.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }
}

pub fn null_quantile_d1(k_trunc: usize, n_draws: usize, theta_x: f64, rng: &mut RandomStream) -> Result<NullQuantiles> {
    if k_trunc < 1 || n_draws < 1 {
        return Err(Error::InvalidConfig("k_trunc and n_draws must be positive".into()));
    }
    if !(theta_x > 0.0 && theta_x < 1.0) {
        return Err(Error::InvalidConfig(format!("theta_x must lie in (0, 1), got {theta_x}")));
    }
    let scale = 1.0 / (theta_x * (1.0 - theta_x));
    let lam: Vec<f64> = (1..=k_trunc).map(|k| scale * d1_eigenvalue(k)).collect();
    let base = rng.next_u64();
    let chunks = n_draws.div_ceil(CHUNK);
    let mut draws: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut r = RandomStream::new(base).derive(c as u64);
            let len = CHUNK.min(n_draws - c * CHUNK);
            let lam = &lam;
            (0..len)
                .map(move |_| lam.iter().map(|&l| {
                    let xi = r.gaussian();
                    l * (xi * xi - 1.0)
                }).sum::<f64>())
                .collect::<Vec<_>>()
        })
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).expect("finite draw"));
    Ok(NullQuantiles { draws })
}
