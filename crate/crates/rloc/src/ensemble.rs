//! Seed-parallel ensembles. Results are gathered in seed order, so they do
//! not depend on the number of workers.

use rayon::prelude::*;
use rayon::ThreadPool;
use rloc_core::ito_verify::{self, EnsembleReport, ItoConfig, ItoRegime};
use rloc_core::local_time::{covering_grid, estimate_local_time};
use rloc_core::stable_process::{ensemble_seed, simulate_path};
use rloc_core::{Alpha, GridFunction, LocalTimeField, Result};

/// Worker count: RL_THREADS when set to a positive integer, otherwise
/// rayon's default.
pub fn thread_count() -> usize {
    std::env::var("RL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

pub fn pool() -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .expect("thread pool")
}

/// `ito_verify::verify` with the paths spread over the pool.
pub fn verify_parallel(
    f: &GridFunction,
    regime: ItoRegime,
    cfg: &ItoConfig,
    seeds: &[u64],
) -> Result<EnsembleReport> {
    if seeds.is_empty() {
        return ito_verify::verify(f, regime, cfg, seeds);
    }
    pool().install(|| {
        let ranges = seeds
            .par_iter()
            .map(|&s| ito_verify::path_range(cfg, s))
            .collect::<Result<Vec<_>>>()?;
        let lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let prep = ito_verify::prepare(f, regime, cfg, lo, hi)?;
        let reports = seeds
            .par_iter()
            .map(|&s| ito_verify::run_path(&prep, s))
            .collect::<Result<Vec<_>>>()?;
        ito_verify::summarize(&prep, reports)
    })
}

/// Settings shared by the members of a local-time ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub alpha: f64,
    pub t: f64,
    pub n_steps: usize,
    pub bandwidth: f64,
    /// Grid spacing; the grid covers each path's range plus one bandwidth.
    pub spacing: f64,
}

/// One field per seed (seed base XOR i), in seed order.
pub fn local_time_ensemble(spec: &FieldSpec, base: u64, count: usize) -> Result<Vec<LocalTimeField>> {
    map_fields(spec, base, count, |f| Ok(f))
}

/// Applies `reduce` to each field as soon as it is built, so large
/// ensembles never hold every field at once.
pub fn map_fields<T, F>(spec: &FieldSpec, base: u64, count: usize, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(LocalTimeField) -> Result<T> + Sync,
{
    let a = Alpha::new(spec.alpha)?;
    pool().install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let p = simulate_path(a, spec.t, spec.n_steps, 1.0, ensemble_seed(base, i))?;
                let grid = covering_grid(&p, spec.bandwidth, spec.spacing);
                reduce(estimate_local_time(&p, &grid, spec.bandwidth)?)
            })
            .collect()
    })
}
