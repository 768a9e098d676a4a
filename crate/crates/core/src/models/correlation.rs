//! Closed-form correlation functions and Malus-law detection probabilities.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::angle::PolAngle;
use super::mixture::{texture_mixture, HvMixture};

/// The four correlation models compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Entangled-state prediction, cos 2(a−b).
    QuantumMechanical,
    /// Rotationally symmetric hidden variable with Malus-law responses.
    SemiClassical,
    /// Rotationally symmetric hidden variable with deterministic sign responses.
    MaxClassicalLHV,
    /// Hidden variable drawn from the texture mixture of the two settings.
    VacuumTexture,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::QuantumMechanical,
        ModelKind::SemiClassical,
        ModelKind::VacuumTexture,
        ModelKind::MaxClassicalLHV,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::QuantumMechanical => "qm",
            ModelKind::SemiClassical => "sc",
            ModelKind::MaxClassicalLHV => "mclhv",
            ModelKind::VacuumTexture => "vt",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownModel(pub String);

impl fmt::Display for UnknownModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown model '{}' (expected qm, sc, mclhv or vt)", self.0)
    }
}

impl std::error::Error for UnknownModel {}

impl FromStr for ModelKind {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qm" | "quantum" | "quantum-mechanical" => Ok(ModelKind::QuantumMechanical),
            "sc" | "semi-classical" | "semiclassical" => Ok(ModelKind::SemiClassical),
            "mclhv" | "max-classical" | "max-classical-lhv" => Ok(ModelKind::MaxClassicalLHV),
            "vt" | "vacuum-texture" => Ok(ModelKind::VacuumTexture),
            _ => Err(UnknownModel(s.to_string())),
        }
    }
}

/// cos 2(a−b)
pub fn corr_qm(a: PolAngle, b: PolAngle) -> f64 {
    (2.0 * a.minus(b)).cos()
}

/// cos 2(a−b) / 2
pub fn corr_sc(a: PolAngle, b: PolAngle) -> f64 {
    0.5 * corr_qm(a, b)
}

/// Correlation of sign responses averaged over a uniform hidden variable.
/// The integral is the triangle wave 1 − 4Δ/π, Δ = |a−b| folded into [0, π/2].
pub fn corr_mclhv(a: PolAngle, b: PolAngle) -> f64 {
    let mut delta = a.minus(b).rem_euclid(PI);
    if delta > FRAC_PI_2 {
        delta = PI - delta;
    }
    1.0 - 4.0 * delta / PI
}

/// Malus's law: probability that a photon with polarization λ is
/// transmitted by a polarizer at `setting`.
pub fn detect_prob(setting: PolAngle, lambda: PolAngle) -> f64 {
    let c = setting.minus(lambda).cos();
    c * c
}

/// Σ_α α·P(α|setting, λ) = cos 2(setting − λ).
pub fn mean_outcome(setting: PolAngle, lambda: PolAngle) -> f64 {
    (2.0 * setting.minus(lambda)).cos()
}

/// Correlation E(a,b) for a hidden variable distributed as `q`, with
/// factorized Malus-law responses at each station.
pub fn corr_mixture(a: PolAngle, b: PolAngle, q: &HvMixture) -> f64 {
    let atoms: f64 = q
        .atoms()
        .iter()
        .map(|atom| atom.weight * mean_outcome(a, atom.angle) * mean_outcome(b, atom.angle))
        .sum();
    atoms + q.uniform_weight() * corr_sc(a, b)
}

/// Coincidence probability P(α = β = +1 | a, b) for a hidden variable
/// distributed as `q`.
pub fn coincidence_mixture(a: PolAngle, b: PolAngle, q: &HvMixture) -> f64 {
    let atoms: f64 = q
        .atoms()
        .iter()
        .map(|atom| atom.weight * detect_prob(a, atom.angle) * detect_prob(b, atom.angle))
        .sum();
    atoms + q.uniform_weight() * (2.0 + corr_qm(a, b)) / 8.0
}

/// Dispatches to the model-specific correlation.
pub fn corr(model: ModelKind, a: PolAngle, b: PolAngle) -> f64 {
    match model {
        ModelKind::QuantumMechanical => corr_qm(a, b),
        ModelKind::SemiClassical => corr_sc(a, b),
        ModelKind::MaxClassicalLHV => corr_mclhv(a, b),
        ModelKind::VacuumTexture => {
            let q = texture_mixture(&[a, b], None).expect("two settings with equal weights");
            corr_mixture(a, b, &q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    fn rad(x: f64) -> PolAngle {
        PolAngle::rad(x)
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn quantum_examples() {
        assert!(close(corr_qm(rad(0.0), rad(0.0)), 1.0, 1e-15));
        assert!(close(corr_qm(rad(0.0), rad(FRAC_PI_4)), 0.0, 1e-15));
        assert!(close(corr_qm(rad(0.0), rad(FRAC_PI_8)), SQRT_2 / 2.0, 1e-15));
    }

    #[test]
    fn semi_classical_examples() {
        assert!(close(corr_sc(rad(0.0), rad(0.0)), 0.5, 1e-15));
        assert!(close(corr_sc(rad(0.0), rad(FRAC_PI_4)), 0.0, 1e-15));
        assert!(close(corr_sc(rad(0.0), rad(FRAC_PI_8)), 0.353_553_390_593_273_8, 1e-15));
    }

    #[test]
    fn max_classical_examples() {
        assert!(close(corr_mclhv(rad(0.0), rad(0.0)), 1.0, 1e-15));
        assert!(close(corr_mclhv(rad(0.0), rad(FRAC_PI_2)), -1.0, 1e-15));
        assert!(close(corr_mclhv(rad(0.0), rad(FRAC_PI_8)), 0.5, 1e-15));
        assert!(close(corr_mclhv(rad(0.0), rad(FRAC_PI_4)), 0.0, 1e-15));
    }

    #[test]
    fn detection_examples() {
        assert!(close(detect_prob(rad(0.0), rad(0.0)), 1.0, 1e-15));
        assert!(close(detect_prob(rad(0.0), rad(FRAC_PI_2)), 0.0, 1e-15));
        assert!(close(
            detect_prob(rad(0.0), rad(FRAC_PI_8)),
            FRAC_PI_8.cos().powi(2),
            1e-15
        ));
    }

    #[test]
    fn texture_mixture_reproduces_quantum() {
        let (a, b) = (rad(0.0), rad(FRAC_PI_8));
        let q = texture_mixture(&[a, b], None).unwrap();
        assert!(close(corr_mixture(a, b, &q), FRAC_PI_4.cos(), 1e-15));
    }

    #[test]
    fn uniform_mixture_is_semi_classical() {
        let (a, b) = (rad(0.3), rad(-1.1));
        assert!(close(
            corr_mixture(a, b, &HvMixture::uniform()),
            corr_sc(a, b),
            1e-15
        ));
    }

    #[test]
    fn out_of_sync_mixture_vanishes_at_standard_angles() {
        let q = texture_mixture(&[rad(FRAC_PI_4), rad(3.0 * FRAC_PI_8)], None).unwrap();
        // atoms at π/4, −π/4, 3π/8, −π/8 with weight 1/4 each
        let by_hand: f64 = [FRAC_PI_4, -FRAC_PI_4, 3.0 * FRAC_PI_8, -FRAC_PI_8]
            .iter()
            .map(|&l| 0.25 * (2.0 * (0.0 - l)).cos() * (2.0 * (FRAC_PI_8 - l)).cos())
            .sum();
        assert!(close(by_hand, 0.0, 1e-15));
        assert!(close(corr_mixture(rad(0.0), rad(FRAC_PI_8), &q), 0.0, 1e-15));
    }

    #[test]
    fn dispatch_examples() {
        assert!(close(corr(ModelKind::SemiClassical, rad(0.0), rad(0.0)), 0.5, 1e-15));
        assert!(close(
            corr(ModelKind::MaxClassicalLHV, rad(0.0), rad(FRAC_PI_4)),
            0.0,
            1e-15
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.short_name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("foo".parse::<ModelKind>().is_err());
    }

    fn angle() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    proptest! {
        #[test]
        fn period_pi(a in angle(), b in angle()) {
            for m in ModelKind::ALL {
                let base = corr(m, rad(a), rad(b));
                prop_assert!(close(corr(m, rad(a + PI), rad(b)), base, 1e-12));
                prop_assert!(close(corr(m, rad(a), rad(b + PI)), base, 1e-12));
            }
        }

        #[test]
        fn joint_rotation(a in angle(), b in angle(), t in angle()) {
            for m in ModelKind::ALL {
                let base = corr(m, rad(a), rad(b));
                prop_assert!(close(corr(m, rad(a + t), rad(b + t)), base, 1e-12));
            }
        }

        #[test]
        fn symmetric(a in angle(), b in angle()) {
            for m in ModelKind::ALL {
                prop_assert!(close(corr(m, rad(a), rad(b)), corr(m, rad(b), rad(a)), 1e-12));
            }
        }

        #[test]
        fn bounded(a in angle(), b in angle()) {
            for m in ModelKind::ALL {
                prop_assert!(corr(m, rad(a), rad(b)).abs() <= 1.0 + 1e-15);
            }
            prop_assert!(corr_sc(rad(a), rad(b)).abs() <= 0.5 + 1e-15);
        }

        #[test]
        fn marginals(s in angle(), l in angle()) {
            let p_plus = detect_prob(rad(s), rad(l));
            let p_minus = (s - l).sin().powi(2);
            prop_assert!(close(p_plus + p_minus, 1.0, 1e-12));
            prop_assert!(close(p_plus - p_minus, mean_outcome(rad(s), rad(l)), 1e-12));
        }
    }
}
