//! Bell-inequality experiments with a setting-dependent hidden variable.
//!
//! The crate evaluates four correlation models in closed form
//! ([`models`]), the effect of switching polarizer settings while the
//! setting information is still in flight ([`choice`]), an event-level
//! Monte Carlo that checks every closed form independently
//! ([`montecarlo`]), and frequency sweeps of the resulting CHSH and S′
//! values ([`sweep`]).

pub mod choice;
pub mod error;
pub mod models;
pub mod montecarlo;
pub mod sweep;

pub use error::{Error, Result};
