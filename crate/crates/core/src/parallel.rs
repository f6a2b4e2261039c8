//! Worker pool wrapper. Results always come back in index order, so every
//! reduction downstream is independent of the worker count.

use rayon::prelude::*;

pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `workers <= 1` runs everything on the calling thread.
    pub fn new(workers: usize) -> Self {
        if workers <= 1 {
            return Self::serial();
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().ok();
        Self { pool }
    }

    pub fn serial() -> Self {
        Self { pool: None }
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        }
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::serial()
    }
}
