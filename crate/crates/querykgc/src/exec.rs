use std::ops::Range;

use querykgc_core::exec::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Executor backed by a dedicated rayon pool of fixed width.
pub struct RayonExecutor {
    pool: ThreadPool,
    threads: usize,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let threads = threads.max(1);
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool, threads })
    }
}

impl Executor for RayonExecutor {
    fn map_range<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 1 {
            return range.map(f).collect();
        }
        self.pool.install(|| range.into_par_iter().map(f).collect())
    }

    fn width(&self) -> usize {
        self.threads
    }
}
