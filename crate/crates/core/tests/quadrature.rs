//! Closed-form correlations against direct numerical integration of
//! E(a,b) = (1/π) ∫ A(a,λ) B(b,λ) dλ over a uniform hidden polarization.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use bellvt::models::{corr_mclhv, corr_sc, PolAngle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Midpoint rule on (−π/2, π/2]. Each jump of size 2 in the integrand
/// costs at most 1/n; for smooth integrands the error is far smaller.
fn average(n: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let h = PI / n as f64;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i| f(-FRAC_PI_2 + (i as f64 + 0.5) * h))
        .sum();
    sum / n as f64
}

fn angle_pairs(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.random_range(-PI..PI), rng.random_range(-PI..PI)))
        .collect()
}

#[test]
fn semi_classical_matches_quadrature() {
    for (a, b) in angle_pairs(100, 11) {
        // Malus mean outcome cos 2(x − λ)
        let e = average(1 << 14, |l| (2.0 * (a - l)).cos() * (2.0 * (b - l)).cos());
        let closed = corr_sc(PolAngle::rad(a), PolAngle::rad(b));
        assert!((e - closed).abs() < 1e-6, "a={a} b={b}: {e} vs {closed}");
    }
}

#[test]
fn max_classical_matches_quadrature() {
    // sign of cos 2(x − λ): +1 when x − λ lies within π/4 of a multiple of π
    let sign = |d: f64| {
        let r = d.rem_euclid(PI);
        if r < FRAC_PI_4 || r >= 3.0 * FRAC_PI_4 { 1.0 } else { -1.0 }
    };
    for (a, b) in angle_pairs(100, 12) {
        // four jumps: error ≤ 4 / 2^22 < 1e-6
        let e = average(1 << 22, |l| sign(a - l) * sign(b - l));
        let closed = corr_mclhv(PolAngle::rad(a), PolAngle::rad(b));
        assert!((e - closed).abs() < 1e-6, "a={a} b={b}: {e} vs {closed}");
    }
}
