use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trials per independently seeded work item. Fixed so that the partition of
/// work, and therefore every sample, is independent of the thread count.
pub const BATCH_SIZE: u64 = 1 << 16;

/// Seed plus stream selector. Each batch of a run draws from its own
/// ChaCha stream `(stream_id << 32) | batch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u32,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u32) -> Self {
        RngSpec { seed, stream_id }
    }

    /// Same seed, different stream.
    pub fn with_stream(self, stream_id: u32) -> Self {
        RngSpec { stream_id, ..self }
    }

    pub fn batch_rng(&self, batch: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.stream_id) << 32) | u64::from(batch));
        rng
    }
}

/// Execution options shared by all Monte Carlo entry points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn workers(n: usize) -> Self {
        McOptions { workers: Some(n) }
    }

    pub(crate) fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> Result<R> {
        match self.workers {
            None => Ok(op()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::ThreadPool(e.to_string()))?;
                Ok(pool.install(op))
            }
        }
    }
}

/// Splits `n` trials into fixed-size batches, runs `work(batch_index,
/// batch_len, rng)` for each in parallel and returns results in batch order.
pub(crate) fn run_batches<T, F>(n: u64, spec: RngSpec, opts: &McOptions, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u32, u64, &mut ChaCha8Rng) -> T + Sync + Send,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let batches = u32::try_from(batches).expect("fewer than 2^32 batches");
    opts.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|i| {
                let start = u64::from(i) * BATCH_SIZE;
                let len = BATCH_SIZE.min(n - start);
                let mut rng = spec.batch_rng(i);
                work(i, len, &mut rng)
            })
            .collect()
    })
}
