//! Polarization angles, hidden-variable mixtures and the closed-form
//! correlation models.

mod angle;
mod correlation;
mod mixture;

pub use angle::{normalize_angle, PolAngle};
pub use correlation::{
    coincidence_mixture, corr, corr_mclhv, corr_mixture, corr_qm, corr_sc, detect_prob,
    mean_outcome, ModelKind, UnknownModel,
};
pub use mixture::{texture_mixture, Atom, HvMixture, MASS_TOLERANCE};
