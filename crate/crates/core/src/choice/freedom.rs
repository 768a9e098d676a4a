use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use super::sync::SyncFractions;
use crate::error::{check_probability, Result};
use crate::models::{corr, corr_mixture, corr_qm, texture_mixture, HvMixture, ModelKind, PolAngle};

/// Alice chooses between `a` and `a_alt`, Bob between `b` and `b_alt`.
/// In a correlation term, `a` and `b` are the settings actually measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceQuad {
    pub a: PolAngle,
    pub b: PolAngle,
    pub a_alt: PolAngle,
    pub b_alt: PolAngle,
}

impl ChoiceQuad {
    pub fn new(a: PolAngle, b: PolAngle, a_alt: PolAngle, b_alt: PolAngle) -> Self {
        ChoiceQuad { a, b, a_alt, b_alt }
    }

    /// (0, π/8, π/4, 3π/8), the CHSH-optimal angles.
    pub fn standard() -> Self {
        ChoiceQuad::new(
            PolAngle::ZERO,
            PolAngle::rad(FRAC_PI_8),
            PolAngle::rad(FRAC_PI_4),
            PolAngle::rad(3.0 * FRAC_PI_8),
        )
    }

    /// The four measured/alternative assignments entering a CHSH-type sum,
    /// with their signs: (a,b;a′,b′) − (a,b′;a′,b) + (a′,b;a,b′) + (a′,b′;a,b).
    pub fn chsh_terms(&self) -> [(f64, ChoiceQuad); 4] {
        let ChoiceQuad { a, b, a_alt, b_alt } = *self;
        [
            (1.0, ChoiceQuad::new(a, b, a_alt, b_alt)),
            (-1.0, ChoiceQuad::new(a, b_alt, a_alt, b)),
            (1.0, ChoiceQuad::new(a_alt, b, a, b_alt)),
            (1.0, ChoiceQuad::new(a_alt, b_alt, a, b)),
        ]
    }
}

/// Relative strength of each station's contribution to the texture
/// mixture. Equal by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationWeights {
    pub alice: f64,
    pub bob: f64,
}

impl Default for StationWeights {
    fn default() -> Self {
        StationWeights {
            alice: 0.5,
            bob: 0.5,
        }
    }
}

impl StationWeights {
    /// Weight `alice_weight` on Alice's atoms, the rest on Bob's.
    pub fn new(alice_weight: f64) -> Result<Self> {
        check_probability("alice weight", alice_weight)?;
        Ok(StationWeights {
            alice: alice_weight,
            bob: 1.0 - alice_weight,
        })
    }

    /// Linear interpolation in the distance ratio r = d_a / (d_a + d_b):
    /// r → 1 silences Alice's atoms, r → 0 silences Bob's.
    pub fn from_distance_ratio(ratio: f64) -> Result<Self> {
        check_probability("distance ratio", ratio)?;
        Self::new(1.0 - ratio)
    }

    pub fn is_equal(&self) -> bool {
        self.alice == self.bob
    }

    fn as_array(&self) -> [f64; 2] {
        [self.alice, self.bob]
    }
}

/// Texture mixture for one (Alice, Bob) pair of past-cone settings.
pub fn pair_mixture(a: PolAngle, b: PolAngle, weights: StationWeights) -> Result<HvMixture> {
    texture_mixture(&[a, b], Some(&weights.as_array()))
}

/// Hidden-variable distribution given the measured settings `quad.a`,
/// `quad.b` when each station was in sync with probability `f_a` / `f_b`
/// independently.
pub fn q_fc(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<HvMixture> {
    let ChoiceQuad { a, b, a_alt, b_alt } = *quad;
    let (fa, fb) = (sf.f_a, sf.f_b);
    let in_in = pair_mixture(a, b, weights)?;
    let in_out = pair_mixture(a, b_alt, weights)?;
    let out_in = pair_mixture(a_alt, b, weights)?;
    let out_out = pair_mixture(a_alt, b_alt, weights)?;
    HvMixture::convex(&[
        (fa * fb, &in_in),
        (fa * (1.0 - fb), &in_out),
        ((1.0 - fa) * fb, &out_in),
        ((1.0 - fa) * (1.0 - fb), &out_out),
    ])
}

/// Correlation at (a, b) when both stations are out of sync:
/// ½{cos 2(a−b) + cos 2(a+b−a′−b′)·cos 2(a′−b′)}.
pub fn corr_os(a: PolAngle, b: PolAngle, a_alt: PolAngle, b_alt: PolAngle) -> f64 {
    let cross = (2.0 * (a.radians() + b.radians() - a_alt.radians() - b_alt.radians())).cos();
    0.5 * (corr_qm(a, b) + cross * corr_qm(a_alt, b_alt))
}

/// Unbalanced correction: ½ sin 2(a′+b′−a−b)·sin 2(a′−b′).
pub fn corr_ub(a: PolAngle, b: PolAngle, a_alt: PolAngle, b_alt: PolAngle) -> f64 {
    let s1 = (2.0 * (a_alt.radians() + b_alt.radians() - a.radians() - b.radians())).sin();
    let s2 = (2.0 * a_alt.minus(b_alt)).sin();
    0.5 * s1 * s2
}

/// f·E_is + (1−f)·E_os + f′·E_ub with equal station weights.
pub fn corr_fc(quad: &ChoiceQuad, sf: &SyncFractions) -> f64 {
    let ChoiceQuad { a, b, a_alt, b_alt } = *quad;
    sf.f * corr_qm(a, b)
        + (1.0 - sf.f) * corr_os(a, b, a_alt, b_alt)
        + sf.f_prime * corr_ub(a, b, a_alt, b_alt)
}

/// E(a,b) by direct summation over the atoms of [`q_fc`]. Valid for any
/// station weights.
pub fn corr_fc_mixture(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<f64> {
    let q = q_fc(quad, sf, weights)?;
    Ok(corr_mixture(quad.a, quad.b, &q))
}

/// |Σ± E_fc| over the four CHSH terms, each with its own measured and
/// alternative settings.
pub fn s_chsh_fc(quad: &ChoiceQuad, sf: &SyncFractions) -> f64 {
    quad.chsh_terms()
        .iter()
        .map(|(sign, term)| sign * corr_fc(term, sf))
        .sum::<f64>()
        .abs()
}

/// [`s_chsh_fc`] assembled from mixture sums; honours unequal weights.
pub fn s_chsh_fc_mixture(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<f64> {
    let mut total = 0.0;
    for (sign, term) in quad.chsh_terms() {
        total += sign * corr_fc_mixture(&term, sf, weights)?;
    }
    Ok(total.abs())
}

/// |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)| for a model without switching.
pub fn s_chsh_fixed(model: ModelKind, quad: &ChoiceQuad) -> f64 {
    let ChoiceQuad { a, b, a_alt, b_alt } = *quad;
    (corr(model, a, b) - corr(model, a, b_alt) + corr(model, a_alt, b) + corr(model, a_alt, b_alt))
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::mix_fractions;
    use crate::models::corr_mixture;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn rad(x: f64) -> PolAngle {
        PolAngle::rad(x)
    }

    fn quad_strategy() -> impl Strategy<Value = ChoiceQuad> {
        prop::array::uniform4(-PI..PI).prop_map(|[a, b, c, d]| ChoiceQuad::new(rad(a), rad(b), rad(c), rad(d)))
    }

    #[test]
    fn q_fc_endpoints() {
        let quad = ChoiceQuad::standard();
        let w = StationWeights::default();
        let q = q_fc(&quad, &SyncFractions::IN_SYNC, w).unwrap();
        assert!(q.approx_eq(&texture_mixture(&[quad.a, quad.b], None).unwrap(), 1e-15));
        let q = q_fc(&quad, &mix_fractions(0.0, 0.0).unwrap(), w).unwrap();
        assert!(q.approx_eq(&texture_mixture(&[quad.a_alt, quad.b_alt], None).unwrap(), 1e-15));
    }

    #[test]
    fn q_fc_aspect_fractions() {
        let quad = ChoiceQuad::standard();
        let sf = mix_fractions(0.97, 0.83).unwrap();
        let q = q_fc(&quad, &sf, StationWeights::default()).unwrap();
        assert_eq!(q.atoms().len(), 16);
        // brute force: every atom's contribution to E(0, π/8)
        let brute: f64 = q
            .atoms()
            .iter()
            .map(|at| at.weight * (2.0 * (0.0 - at.angle.radians())).cos() * (2.0 * (FRAC_PI_8 - at.angle.radians())).cos())
            .sum();
        assert!((brute - corr_fc(&quad, &sf)).abs() < 1e-12);
        assert!((brute - 0.90 * SQRT_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_sync_examples() {
        let (a, b) = (rad(0.3), rad(-0.7));
        assert!((corr_os(a, b, a, b) - corr_qm(a, b)).abs() < 1e-15);
        let s = ChoiceQuad::standard();
        assert!(corr_os(s.a, s.b, s.a_alt, s.b_alt).abs() < 1e-15);
        assert!(corr_os(rad(0.0), rad(0.0), rad(FRAC_PI_4), rad(FRAC_PI_4)).abs() < 1e-15);
    }

    #[test]
    fn unbalanced_examples() {
        let s = ChoiceQuad::standard();
        assert!(corr_ub(s.a, s.b, s.a_alt, s.b_alt).abs() < 1e-15);
        let (a, b) = (rad(0.3), rad(-0.7));
        assert!(corr_ub(a, b, a, b).abs() < 1e-15);
        let v = corr_ub(rad(0.0), rad(0.0), rad(FRAC_PI_8), rad(0.0));
        assert!((v - 0.25).abs() < 1e-15);
        // same value from the atom sums of the two unbalanced mixtures
        let w = StationWeights::default();
        let brute = corr_mixture(rad(0.0), rad(0.0), &pair_mixture(rad(0.0), rad(0.0), w).unwrap())
            - corr_mixture(rad(0.0), rad(0.0), &pair_mixture(rad(FRAC_PI_8), rad(0.0), w).unwrap());
        assert!((brute - 0.25).abs() < 1e-15);
    }

    #[test]
    fn corr_fc_examples() {
        let quad = ChoiceQuad::new(rad(0.2), rad(0.9), rad(-0.4), rad(1.3));
        let v = corr_fc(&quad, &SyncFractions::IN_SYNC);
        assert!((v - corr_qm(quad.a, quad.b)).abs() < 1e-15);
        let half = mix_fractions(0.5, 0.5).unwrap();
        let expected = (corr_qm(quad.a, quad.b) + corr_os(quad.a, quad.b, quad.a_alt, quad.b_alt)) / 2.0;
        assert!((corr_fc(&quad, &half) - expected).abs() < 1e-15);
    }

    #[test]
    fn chsh_values() {
        let s = ChoiceQuad::standard();
        let at = |f: f64| s_chsh_fc(&s, &SyncFractions::balanced(f).unwrap());
        assert!((at(1.0) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((at(0.5) - SQRT_2).abs() < 1e-12);
        assert!((at(0.9) - 2.0 * SQRT_2 * 0.9).abs() < 1e-12);
        assert!((s_chsh_fixed(ModelKind::QuantumMechanical, &s) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((s_chsh_fixed(ModelKind::VacuumTexture, &s) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((s_chsh_fixed(ModelKind::SemiClassical, &s) - SQRT_2).abs() < 1e-12);
        assert!((s_chsh_fixed(ModelKind::MaxClassicalLHV, &s) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_from_distance() {
        let w = StationWeights::from_distance_ratio(0.5).unwrap();
        assert!(w.is_equal());
        let w = StationWeights::from_distance_ratio(1.0).unwrap();
        assert_eq!((w.alice, w.bob), (0.0, 1.0));
        assert!(StationWeights::from_distance_ratio(1.5).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_matches_mixture(quad in quad_strategy(), fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
            let sf = mix_fractions(fa, fb).unwrap();
            let direct = corr_fc_mixture(&quad, &sf, StationWeights::default()).unwrap();
            prop_assert!((corr_fc(&quad, &sf) - direct).abs() < 1e-12);
        }

        #[test]
        fn chsh_linear_in_f(f in 0.0f64..=1.0, fa in 0.0f64..=1.0) {
            let s = ChoiceQuad::standard();
            prop_assert!((s_chsh_fc(&s, &SyncFractions::balanced(f).unwrap()) - 2.0 * SQRT_2 * f).abs() < 1e-12);
            // f' does not matter at the standard angles
            let fb = (2.0 * f - fa).clamp(0.0, 1.0);
            let sf = mix_fractions(fa, fb).unwrap();
            prop_assert!((s_chsh_fc(&s, &sf) - 2.0 * SQRT_2 * sf.f).abs() < 1e-12);
        }

        #[test]
        fn classical_models_obey_chsh(quad in quad_strategy()) {
            prop_assert!(s_chsh_fixed(ModelKind::SemiClassical, &quad) <= 2.0 + 1e-12);
            prop_assert!(s_chsh_fixed(ModelKind::MaxClassicalLHV, &quad) <= 2.0 + 1e-12);
        }

        #[test]
        fn assembled_chsh_matches_closed(quad in quad_strategy(), fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
            let sf = mix_fractions(fa, fb).unwrap();
            let w = StationWeights::default();
            prop_assert!((s_chsh_fc(&quad, &sf) - s_chsh_fc_mixture(&quad, &sf, w).unwrap()).abs() < 1e-12);
        }
    }
}
