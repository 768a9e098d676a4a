use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polarization angle in radians. Polarization has period π, so every
/// value is stored as its representative in (−π/2, π/2].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PolAngle(f64);

impl PolAngle {
    pub const ZERO: PolAngle = PolAngle(0.0);

    /// Normalizes `radians` into (−π/2, π/2].
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFiniteAngle(radians));
        }
        Ok(PolAngle(fold(radians)))
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::NonFiniteAngle(degrees));
        }
        Self::new(degrees.to_radians())
    }

    /// Constant-friendly constructor for values already known to be finite.
    ///
    /// # Panics
    /// If `radians` is not finite.
    pub fn rad(radians: f64) -> Self {
        Self::new(radians).expect("finite angle")
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// The orthogonal polarization, `self − π/2`.
    pub fn orthogonal(self) -> Self {
        PolAngle(fold(self.0 - FRAC_PI_2))
    }

    /// Signed difference `self − other`, not folded.
    pub fn minus(self, other: PolAngle) -> f64 {
        self.0 - other.0
    }
}

fn fold(radians: f64) -> f64 {
    let mut r = radians.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if r >= PI {
        r -= PI;
    }
    if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

/// Free-function form of [`PolAngle::new`].
pub fn normalize_angle(radians: f64) -> Result<PolAngle> {
    PolAngle::new(radians)
}

impl TryFrom<f64> for PolAngle {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        PolAngle::new(value)
    }
}

impl From<PolAngle> for f64 {
    fn from(value: PolAngle) -> f64 {
        value.0
    }
}

impl fmt::Display for PolAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}
