//! Ordered map over independent work units, on rayon when the `parallel`
//! feature is enabled and sequentially otherwise.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How work units are scheduled. Results come back in input order either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Up to `jobs` worker threads; `None` uses the host's parallelism.
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        jobs: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { jobs: None }
        } else {
            Execution::Sequential
        }
    }
}

pub(crate) struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub(crate) fn new(execution: Execution) -> Result<Self, String> {
        #[cfg(feature = "parallel")]
        {
            let pool = match execution {
                Execution::Sequential => None,
                Execution::Parallel { jobs } => {
                    let mut builder = rayon::ThreadPoolBuilder::new();
                    if let Some(jobs) = jobs {
                        builder = builder.num_threads(jobs);
                    }
                    Some(builder.build().map_err(|e| e.to_string())?)
                }
            };
            Ok(Executor { pool })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = execution;
            Ok(Executor {})
        }
    }

    pub(crate) fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}
