//! Seeded, reproducible Monte Carlo engines.
//!
//! Two continuous-time games with control-dependent observation are
//! estimated here: switching between two Brownian motions
//! ([`switching`]) and drift-tracking a Poisson-modulated process
//! ([`poisson`]); [`verifylemma`] checks the closed-form value candidates
//! against the supermartingale/martingale conditions they must satisfy.
//!
//! Reproducibility contract: a run is a pure function of `(seed, n_paths)`.
//! Path `i` draws from the counter-derived substream `(seed, i)`, per-path
//! results are collected in path order and reduced by a deterministic
//! pairwise sum, so estimates are bit-identical no matter how many worker
//! threads run the paths. The `BELLMAN_THREADS` environment variable caps
//! the worker count.

pub mod analytic;
pub mod gauss;
pub mod poisson;
pub mod rng;
pub mod switching;
pub mod verifylemma;

use crate::{Error, Result};

/// A Monte Carlo estimate with its sampling error and the bound on what the
/// horizon truncation can have discarded.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    /// Upper bound on the absolute truncation bias.
    pub tail_bound: f64,
}

impl Estimate {
    /// |mean − target| ≤ max(3·SE, floor). Configs are validated so that the
    /// truncation tail is well below any tolerance used here; the reported
    /// `tail_bound` stays a diagnostic, not extra slack.
    pub fn within(&self, target: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= (3.0 * self.std_error).max(floor)
    }

    pub fn three_se(&self) -> f64 {
        3.0 * self.std_error
    }
}

/// Deterministic pairwise (binary-tree) sum in slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Mean and standard error via pairwise reduction.
pub fn estimate_from_samples(samples: &[f64], tail_bound: f64) -> Result<Estimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config("need at least two paths".into()));
    }
    let mean = pairwise_sum(samples) / n as f64;
    let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    Ok(Estimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_paths: n as u64,
        tail_bound,
    })
}

/// Worker-count cap from the `BELLMAN_THREADS` environment variable.
pub fn env_thread_cap() -> Option<usize> {
    std::env::var("BELLMAN_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `path_fn(i)` for every path index, in parallel when a pool is
/// available, always returning results in path order.
pub fn run_paths<T, F>(n_paths: u64, threads: Option<usize>, path_fn: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    use rayon::prelude::*;
    let work = || (0..n_paths).into_par_iter().map(&path_fn).collect::<Vec<T>>();
    match threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64) * 0.001).collect();
        let seq: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - seq).abs() < 1e-9);
    }

    #[test]
    fn estimates_are_thread_count_invariant() {
        let f = |i: u64| (i as f64).sin();
        let one = run_paths(10_000, Some(1), f).unwrap();
        let four = run_paths(10_000, Some(4), f).unwrap();
        let none = run_paths(10_000, None, f).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, none);
        let a = estimate_from_samples(&one, 0.0).unwrap();
        let b = estimate_from_samples(&four, 0.0).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
