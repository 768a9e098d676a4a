use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_trials: u64,
}

impl EstimateWithError {
    /// Mean of ±1 outcomes from `n` trials with sum `sum`.
    pub fn from_signed_sum(sum: i64, n: u64) -> Self {
        let mean = sum as f64 / n as f64;
        let var = (1.0 - mean * mean).max(0.0);
        EstimateWithError {
            value: mean,
            std_error: (var / n.saturating_sub(1).max(1) as f64).sqrt(),
            n_trials: n,
        }
    }

    /// Fraction of `hits` among `n` Bernoulli trials.
    pub fn from_proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        EstimateWithError {
            value: p,
            std_error: (p * (1.0 - p) / n.saturating_sub(1).max(1) as f64).sqrt(),
            n_trials: n,
        }
    }

    /// Number of standard errors between the estimate and `target`.
    /// Zero-error estimates count as infinitely far unless exact.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.sigmas_from(target) <= sigmas
    }
}

/// Signed sum of independent estimates, errors added in quadrature.
pub(crate) fn combine(terms: &[(f64, EstimateWithError)]) -> EstimateWithError {
    let value = terms.iter().map(|(s, e)| s * e.value).sum();
    let var: f64 = terms.iter().map(|(s, e)| (s * e.std_error).powi(2)).sum();
    EstimateWithError {
        value,
        std_error: var.sqrt(),
        n_trials: terms.iter().map(|(_, e)| e.n_trials).sum(),
    }
}
