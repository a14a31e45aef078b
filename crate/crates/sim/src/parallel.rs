//! Deterministic fan-out of Monte-Carlo trials over a worker pool.
//!
//! Every trial derives its own seed from `(seed, stream, trial)` and results
//! are gathered in trial order, so output never depends on the worker count.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::SimError;

/// Caps the number of worker threads.
pub const THREADS_ENV: &str = "IRS_SIM_THREADS";

/// Seed of trial `trial` in substream `stream`.
pub fn trial_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * trial as u128);
    rng.next_u64()
}

#[derive(Clone)]
pub struct Runner {
    pool: Arc<rayon::ThreadPool>,
}

impl Runner {
    /// Pool with `threads` workers; `None` reads `IRS_SIM_THREADS`, then
    /// falls back to the available parallelism.
    pub fn new(threads: Option<usize>) -> Result<Self, SimError> {
        let n = match threads {
            Some(n) => n,
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| SimError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
                Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            },
        };
        if n == 0 {
            return Err(SimError::Config("worker count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
        Ok(Self { pool: Arc::new(pool) })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0), ..., f(n-1)` evaluated on the pool, in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }

    /// Like [`Runner::map`] for fallible trials; the first error in index order wins.
    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>, SimError>
    where
        T: Send,
        F: Fn(usize) -> Result<T, SimError> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}
