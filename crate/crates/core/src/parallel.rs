//! Index-addressed parallel map.
//!
//! Results land in slots keyed by index, and the first error is picked by
//! index rather than by completion time, so the worker count never leaks
//! into the output.

use rayon::prelude::*;

use crate::error::{Error, Result};

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {workers} workers: {e}")))
}

pub fn map_indexed<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let slots: Vec<Result<T>> = if workers <= 1 {
        (0..count).map(&f).collect()
    } else {
        pool(workers)?.install(|| (0..count).into_par_iter().map(&f).collect())
    };
    slots.into_iter().collect()
}
