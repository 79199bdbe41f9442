//! Parallel fan-out of a batch over a rayon pool.

use etc_lab_core::montecarlo::{aggregate, simulate_run, BatchError, BatchReport, BatchSpec};
use etc_lab_core::{Certificate, ClosedLoop};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParallelError {
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs the batch on `workers` threads (all cores when `None`). Runs are
/// independent streams and the report is assembled in run order, so the
/// result does not depend on the number of workers.
pub fn run_batch_parallel(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    spec: &BatchSpec,
    workers: Option<usize>,
) -> Result<BatchReport, ParallelError> {
    spec.validate(sys, cert)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build()?;
    let outcomes = pool.install(|| {
        (0..spec.n_runs)
            .into_par_iter()
            .map(|k| simulate_run(sys, cert, spec, k))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(aggregate(outcomes))
}
