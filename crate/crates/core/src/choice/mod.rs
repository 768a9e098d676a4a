//! Freedom-of-choice algebra: in-sync fractions of switched stations, the
//! resulting hidden-variable mixtures, and the CHSH / Aspect S′ values
//! they imply.

mod counts;
mod freedom;
mod sync;

pub use counts::{
    chsh_coincidences, n_fc, n_fc_mixture, n_os, n_qm, n_sc, n_single, n_ub, s_prime,
    s_prime_fc_closed, s_prime_fc_mixture, s_prime_model, CoincidenceModel, IDEAL_SINGLES,
};
pub use freedom::{
    corr_fc, corr_fc_mixture, corr_os, corr_ub, pair_mixture, q_fc, s_chsh_fc, s_chsh_fc_mixture,
    s_chsh_fixed, ChoiceQuad, StationWeights,
};
pub use sync::{
    mix_fractions, sync_fraction, StationConfig, Switching, SyncFractions, ASPECT_NU_ALICE,
    ASPECT_NU_BOB, ASPECT_ROUND_TRIP,
};
