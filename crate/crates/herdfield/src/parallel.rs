//! Worker pool for independent jobs: sweep points and seeded agent runs.
//!
//! Results are always collected in input order, so the thread count never
//! changes an output byte.

use herdfield_core::population::{finite_n_simulate, EmpiricalTrajectory};
use herdfield_core::sweep::{classify_alpha, PhasePoint, SweepSetup};
use herdfield_core::{EquilibriumTable, ModelParams, TypeMeanField};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::ConfigError;

/// Caps the number of worker threads; `0` or unset picks one per core.
pub const THREADS_ENV: &str = "HERDFIELD_THREADS";

fn parse_threads(raw: Option<&str>) -> Result<usize, ConfigError> {
    match raw.map(str::trim) {
        None | Some("") => Ok(0),
        Some(s) => s.parse().map_err(|_| ConfigError::Invalid {
            key: THREADS_ENV.to_owned(),
            reason: format!("expected a non-negative integer, got {s:?}"),
        }),
    }
}

/// Thread count requested through the environment (0 = automatic).
pub fn requested_threads() -> Result<usize, ConfigError> {
    parse_threads(std::env::var(THREADS_ENV).ok().as_deref())
}

pub fn pool(threads: usize) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Pool sized from the environment.
pub fn pool_from_env() -> Result<ThreadPool, ConfigError> {
    Ok(pool(requested_threads()?))
}

/// [`herdfield_core::sweep::alpha_sweep`] with the points solved concurrently.
pub fn alpha_sweep(pool: &ThreadPool, alphas: &[f64], setup: &SweepSetup) -> Vec<PhasePoint> {
    pool.install(|| {
        alphas
            .par_iter()
            .map(|&a| classify_alpha(a, setup))
            .collect()
    })
}

/// One finite-population run per seed.
pub fn finite_n_runs(
    pool: &ThreadPool,
    population: usize,
    z0: TypeMeanField,
    theta: &EquilibriumTable,
    params: &ModelParams,
    horizon: usize,
    seeds: &[u64],
) -> Vec<EmpiricalTrajectory> {
    pool.install(|| {
        seeds
            .par_iter()
            .filter_map(|&s| finite_n_simulate(population, z0, theta, params, horizon, s))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_variable() {
        assert_eq!(parse_threads(None).unwrap(), 0);
        assert_eq!(parse_threads(Some(" 3 ")).unwrap(), 3);
        let e = parse_threads(Some("many")).unwrap_err();
        assert!(e.to_string().contains(THREADS_ENV));
    }
}
