use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use super::estimate::EstimateWithError;
use super::rng::{run_batches, McOptions, RngSpec};
use crate::error::{Error, Result};
use crate::models::{detect_prob, HvMixture, PolAngle};

/// Draws a hidden-variable angle from `q`: an atom with probability equal to
/// its weight, otherwise a uniform angle on (−π/2, π/2].
pub fn sample_lambda<R: Rng + ?Sized>(q: &HvMixture, rng: &mut R) -> PolAngle {
    let u: f64 = rng.random();
    let mut acc = q.uniform_weight();
    if u < acc {
        // 1 − v with v ∈ [0, 1) keeps the open end at −π/2
        let v: f64 = rng.random();
        return PolAngle::rad(FRAC_PI_2 - PI * v);
    }
    for atom in q.atoms() {
        acc += atom.weight;
        if u < acc {
            return atom.angle;
        }
    }
    // rounding left u above the cumulative mass
    q.atoms()
        .iter()
        .rev()
        .find(|a| a.weight > 0.0)
        .map(|a| a.angle)
        .unwrap_or_else(|| PolAngle::rad(FRAC_PI_2 - PI * rng.random::<f64>()))
}

/// Malus-law outcome: +1 (transmitted) with probability cos²(setting − λ).
pub fn draw_outcome<R: Rng + ?Sized>(setting: PolAngle, lambda: PolAngle, rng: &mut R) -> i8 {
    if rng.random::<f64>() < detect_prob(setting, lambda) {
        1
    } else {
        -1
    }
}

/// Estimates E(a,b) for a setting-independent hidden variable `q`: each
/// trial samples λ and draws both outcomes independently given λ.
pub fn run_static(
    a: PolAngle,
    b: PolAngle,
    q: &HvMixture,
    n: u64,
    spec: RngSpec,
    opts: &McOptions,
) -> Result<EstimateWithError> {
    if n == 0 {
        return Err(Error::NoTrials);
    }
    q.check_normalized()?;
    let sums = run_batches(n, spec, opts, |_, len, rng| {
        let mut sum = 0i64;
        for _ in 0..len {
            let lambda = sample_lambda(q, rng);
            let alpha = draw_outcome(a, lambda, rng);
            let beta = draw_outcome(b, lambda, rng);
            sum += i64::from(alpha * beta);
        }
        sum
    })?;
    Ok(EstimateWithError::from_signed_sum(sums.iter().sum(), n))
}
