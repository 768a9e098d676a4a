//! Single-channel coincidence probabilities and the Aspect S′ combination.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::freedom::{q_fc, ChoiceQuad, StationWeights};
use super::sync::SyncFractions;
use crate::error::{check_probability, Result};
use crate::models::{coincidence_mixture, corr_mclhv, corr_qm, ModelKind, PolAngle};

/// Singles ratio N(a,∞)/N(∞,∞) for an ideal polarizer.
pub const IDEAL_SINGLES: f64 = 0.5;

/// Which prediction to use for P(α = β = +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoincidenceModel {
    Fixed(ModelKind),
    FreedomOfChoice(SyncFractions),
}

/// cos²(a−b)/2
pub fn n_qm(a: PolAngle, b: PolAngle) -> f64 {
    let c = a.minus(b).cos();
    c * c / 2.0
}

/// (2 + cos 2(a−b))/8
pub fn n_sc(a: PolAngle, b: PolAngle) -> f64 {
    (2.0 + corr_qm(a, b)) / 8.0
}

/// Both stations out of sync:
/// (1/8){2 + cos 2(a−b) + cos 2(a+b−a′−b′)·cos 2(a′−b′)}.
pub fn n_os(quad: &ChoiceQuad) -> f64 {
    let ChoiceQuad { a, b, a_alt, b_alt } = *quad;
    let cross = (2.0 * (a.radians() + b.radians() - a_alt.radians() - b_alt.radians())).cos();
    (2.0 + corr_qm(a, b) + cross * corr_qm(a_alt, b_alt)) / 8.0
}

/// Unbalanced correction: (1/8) sin 2(a′+b′−a−b)·sin 2(a′−b′).
pub fn n_ub(quad: &ChoiceQuad) -> f64 {
    let ChoiceQuad { a, b, a_alt, b_alt } = *quad;
    let s1 = (2.0 * (a_alt.radians() + b_alt.radians() - a.radians() - b.radians())).sin();
    (s1 * (2.0 * a_alt.minus(b_alt)).sin()) / 8.0
}

/// f·n_is + (1−f)·n_os + f′·n_ub with equal station weights.
pub fn n_fc(quad: &ChoiceQuad, sf: &SyncFractions) -> f64 {
    sf.f * n_qm(quad.a, quad.b) + (1.0 - sf.f) * n_os(quad) + sf.f_prime * n_ub(quad)
}

/// P(α = β = +1) at the measured settings `quad.a`, `quad.b`.
pub fn n_single(model: CoincidenceModel, quad: &ChoiceQuad) -> f64 {
    let (a, b) = (quad.a, quad.b);
    match model {
        CoincidenceModel::Fixed(ModelKind::QuantumMechanical | ModelKind::VacuumTexture) => n_qm(a, b),
        CoincidenceModel::Fixed(ModelKind::SemiClassical) => n_sc(a, b),
        // sign responses have zero-mean marginals, so P(++) = (1 + E)/4
        CoincidenceModel::Fixed(ModelKind::MaxClassicalLHV) => (1.0 + corr_mclhv(a, b)) / 4.0,
        CoincidenceModel::FreedomOfChoice(sf) => n_fc(quad, &sf),
    }
}

/// P(α = β = +1) summed over the atoms of [`q_fc`]; honours unequal weights.
pub fn n_fc_mixture(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<f64> {
    let q = q_fc(quad, sf, weights)?;
    Ok(coincidence_mixture(quad.a, quad.b, &q))
}

/// n(a,b) − n(a,b′) + n(a′,b) + n(a′,b′) − s_A(a′) − s_B(b), where
/// `n = [n(a,b), n(a,b′), n(a′,b), n(a′,b′)]` and `singles = [s_A(a′), s_B(b)]`.
pub fn s_prime(n: &[f64; 4], singles: &[f64; 2]) -> Result<f64> {
    const NAMES: [&str; 4] = ["n(a,b)", "n(a,b')", "n(a',b)", "n(a',b')"];
    for (name, &v) in NAMES.iter().zip(n) {
        check_probability(name, v)?;
    }
    check_probability("N(a',inf)/N(inf,inf)", singles[0])?;
    check_probability("N(inf,b)/N(inf,inf)", singles[1])?;
    Ok(n[0] - n[1] + n[2] + n[3] - singles[0] - singles[1])
}

/// Coincidence probabilities for the four CHSH terms of `quad`, in the
/// order expected by [`s_prime`].
pub fn chsh_coincidences(model: CoincidenceModel, quad: &ChoiceQuad) -> [f64; 4] {
    quad.chsh_terms().map(|(_, term)| n_single(model, &term))
}

/// S′ for a model with ideal singles of ½.
pub fn s_prime_model(model: CoincidenceModel, quad: &ChoiceQuad) -> Result<f64> {
    s_prime(&chsh_coincidences(model, quad), &[IDEAL_SINGLES, IDEAL_SINGLES])
}

/// S′ assembled from mixture sums with arbitrary station weights.
pub fn s_prime_fc_mixture(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<f64> {
    let mut n = [0.0; 4];
    for (slot, (_, term)) in n.iter_mut().zip(quad.chsh_terms()) {
        *slot = n_fc_mixture(&term, sf, weights)?;
    }
    s_prime(&n, &[IDEAL_SINGLES, IDEAL_SINGLES])
}

/// −½ + f/√2, the S′ value at the standard angles.
pub fn s_prime_fc_closed(f: f64) -> Result<f64> {
    check_probability("f", f)?;
    Ok(-0.5 + f / SQRT_2)
}
