//! Event-level Monte Carlo: hidden-variable sampling, Malus-law outcomes,
//! the switching timeline, and estimators with standard errors. Everything
//! here is independent of the closed forms in [`crate::choice`] and serves
//! as their oracle.
//!
//! Work is split into fixed-size batches, each with its own ChaCha stream,
//! so results are bit-identical for any number of worker threads.

mod estimate;
mod rng;
mod sampling;
mod tally;
mod timeline;

pub use estimate::EstimateWithError;
pub use rng::{McOptions, RngSpec, BATCH_SIZE};
pub use sampling::{draw_outcome, run_static, sample_lambda};
pub use tally::{
    estimate_s_chsh, estimate_s_prime, experiment_tally, static_tally, station_quad, timeline_tally, SettingTally,
    Tally,
};
pub use timeline::{pair_count, run_timeline, EmissionSchedule, TimelineConfig, TrialRecord};
