use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::models::PolAngle;

/// Round-trip light time between switch and source in the 1982 experiment.
pub const ASPECT_ROUND_TRIP: f64 = 43e-9;
/// Alice's switching frequency in the 1982 experiment.
pub const ASPECT_NU_ALICE: f64 = 46.2e6;
/// Bob's switching frequency in the 1982 experiment.
pub const ASPECT_NU_BOB: f64 = 48.4e6;

/// How a station alternates between its two settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Switching {
    /// 50% duty-cycle square wave at `switch_frequency`; a zero frequency
    /// holds `setting_1`.
    #[default]
    Periodic,
    /// Independent fair choice at every instant the setting is read.
    Random,
}

/// One observer's polarizer settings and switching schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationConfig {
    pub setting_1: PolAngle,
    pub setting_2: PolAngle,
    /// Hz; zero means the setting never changes.
    pub switch_frequency: f64,
    /// Radians within one switching period.
    pub switch_phase: f64,
    /// 2d/c in seconds.
    pub round_trip_time: f64,
    #[serde(default)]
    pub switching: Switching,
}

impl StationConfig {
    pub fn new(
        setting_1: PolAngle,
        setting_2: PolAngle,
        switch_frequency: f64,
        switch_phase: f64,
        round_trip_time: f64,
    ) -> Result<Self> {
        let config = StationConfig {
            setting_1,
            setting_2,
            switch_frequency,
            switch_phase,
            round_trip_time,
            switching: Switching::Periodic,
        };
        config.validate()?;
        Ok(config)
    }

    /// A station that never switches.
    pub fn fixed(setting_1: PolAngle, setting_2: PolAngle, round_trip_time: f64) -> Result<Self> {
        Self::new(setting_1, setting_2, 0.0, 0.0, round_trip_time)
    }

    /// A station that picks its setting at random every time it is read.
    pub fn random(setting_1: PolAngle, setting_2: PolAngle, round_trip_time: f64) -> Result<Self> {
        let mut config = Self::new(setting_1, setting_2, 0.0, 0.0, round_trip_time)?;
        config.switching = Switching::Random;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        check_frequency(self.switch_frequency)?;
        check_round_trip(self.round_trip_time)?;
        if !self.switch_phase.is_finite() {
            return Err(Error::NonFiniteAngle(self.switch_phase));
        }
        Ok(())
    }

    /// One-way light time d/c between station and source.
    pub fn one_way_time(&self) -> f64 {
        self.round_trip_time / 2.0
    }

    /// Index (0 or 1) of the periodic setting active at time `t`.
    pub fn periodic_index(&self, t: f64) -> usize {
        if self.switch_frequency == 0.0 {
            return 0;
        }
        let cycles = self.switch_frequency * t + self.switch_phase / (2.0 * PI);
        if cycles.rem_euclid(1.0) < 0.5 {
            0
        } else {
            1
        }
    }

    pub fn setting(&self, index: usize) -> PolAngle {
        if index == 0 {
            self.setting_1
        } else {
            self.setting_2
        }
    }

    /// Expected fraction of photons measured with the same setting that was
    /// in place when the texture left the station.
    pub fn sync_fraction(&self) -> f64 {
        match self.switching {
            Switching::Periodic => sync_fraction(self.switch_frequency, self.round_trip_time)
                .expect("validated configuration"),
            Switching::Random => 0.5,
        }
    }
}

fn check_frequency(nu: f64) -> Result<()> {
    if nu.is_finite() && nu >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFrequency(nu))
    }
}

fn check_round_trip(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRoundTrip(t))
    }
}

/// In-sync fraction of a perfect square-wave switch with frequency `nu`
/// and station–source round trip `round_trip_time`:
/// (1/π)·arccos(cos(2π(round_trip·ν − ½))). A fixed switch (ν = 0) is
/// always in sync.
///
/// Evaluated as the equivalent triangle wave 1 − 2·dist(round_trip·ν, ℤ),
/// which stays exact at the extrema where arccos loses half its digits.
pub fn sync_fraction(nu: f64, round_trip_time: f64) -> Result<f64> {
    check_frequency(nu)?;
    check_round_trip(round_trip_time)?;
    if nu == 0.0 {
        return Ok(1.0);
    }
    let x = (round_trip_time * nu).rem_euclid(1.0);
    Ok(1.0 - 2.0 * x.min(1.0 - x))
}

/// Per-station in-sync fractions and their balanced/unbalanced combinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncFractions {
    pub f_a: f64,
    pub f_b: f64,
    /// (f_a + f_b) / 2
    pub f: f64,
    /// (f_a − f_b) / 2
    pub f_prime: f64,
}

impl SyncFractions {
    /// Both stations always in sync.
    pub const IN_SYNC: SyncFractions = SyncFractions {
        f_a: 1.0,
        f_b: 1.0,
        f: 1.0,
        f_prime: 0.0,
    };

    /// Balanced fractions with f_a = f_b = f.
    pub fn balanced(f: f64) -> Result<Self> {
        mix_fractions(f, f)
    }

    pub fn from_stations(alice: &StationConfig, bob: &StationConfig) -> Self {
        mix_fractions(alice.sync_fraction(), bob.sync_fraction()).expect("fractions in [0, 1]")
    }
}

pub fn mix_fractions(f_a: f64, f_b: f64) -> Result<SyncFractions> {
    check_probability("f_A", f_a)?;
    check_probability("f_B", f_b)?;
    Ok(SyncFractions {
        f_a,
        f_b,
        f: (f_a + f_b) / 2.0,
        f_prime: (f_a - f_b) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aspect_alice() {
        let f = sync_fraction(ASPECT_NU_ALICE, ASPECT_ROUND_TRIP).unwrap();
        assert!((f - 0.9732).abs() < 1e-9, "{f}");
    }

    #[test]
    fn aspect_bob() {
        // 48.4 MHz × 43 ns = 2.0812 cycles, 0.0812 past a whole cycle
        let f = sync_fraction(ASPECT_NU_BOB, ASPECT_ROUND_TRIP).unwrap();
        assert!((f - 0.8376).abs() < 1e-9, "{f}");
    }

    #[test]
    fn whole_and_half_cycles() {
        for n in 1..6 {
            let nu = n as f64 / ASPECT_ROUND_TRIP;
            assert!((sync_fraction(nu, ASPECT_ROUND_TRIP).unwrap() - 1.0).abs() < 1e-12);
            let nu = (n as f64 + 0.5) / ASPECT_ROUND_TRIP;
            assert!(sync_fraction(nu, ASPECT_ROUND_TRIP).unwrap().abs() < 1e-12);
        }
        assert_eq!(sync_fraction(0.0, ASPECT_ROUND_TRIP).unwrap(), 1.0);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(sync_fraction(1e6, 0.0), Err(Error::InvalidRoundTrip(0.0)));
        assert_eq!(sync_fraction(1e6, -1.0), Err(Error::InvalidRoundTrip(-1.0)));
        assert_eq!(sync_fraction(-1.0, 1e-9), Err(Error::InvalidFrequency(-1.0)));
    }

    #[test]
    fn mixing() {
        let sf = mix_fractions(0.97, 0.83).unwrap();
        assert!((sf.f - 0.90).abs() < 1e-12);
        assert!((sf.f_prime - 0.07).abs() < 1e-12);
        let sf = mix_fractions(1.0, 1.0).unwrap();
        assert_eq!((sf.f, sf.f_prime), (1.0, 0.0));
        let sf = mix_fractions(0.5, 0.5).unwrap();
        assert_eq!((sf.f, sf.f_prime), (0.5, 0.0));
        assert!(mix_fractions(1.1, 0.5).is_err());
        assert!(mix_fractions(0.5, -0.1).is_err());
    }

    #[test]
    fn periodic_index_follows_square_wave() {
        let s = StationConfig::new(PolAngle::ZERO, PolAngle::rad(0.5), 1.0, 0.0, 1e-9).unwrap();
        assert_eq!(s.periodic_index(0.1), 0);
        assert_eq!(s.periodic_index(0.6), 1);
        assert_eq!(s.periodic_index(1.1), 0);
        assert_eq!(s.periodic_index(-0.4), 1);
        let shifted = StationConfig { switch_phase: PI, ..s };
        assert_eq!(shifted.periodic_index(0.1), 1);
    }

    proptest! {
        #[test]
        fn periodic_in_frequency(nu in 0.0f64..1e9, k in 1u32..5) {
            let t = ASPECT_ROUND_TRIP;
            let f0 = sync_fraction(nu, t).unwrap();
            let f1 = sync_fraction(nu + k as f64 / t, t).unwrap();
            prop_assert!((f0 - f1).abs() < 1e-9 || nu == 0.0);
            prop_assert!((0.0..=1.0).contains(&f0));
        }

        #[test]
        fn matches_arccos_form(nu in 1.0f64..1e9) {
            let phase = 2.0 * PI * (ASPECT_ROUND_TRIP * nu - 0.5);
            let expected = phase.cos().acos() / PI;
            prop_assert!((sync_fraction(nu, ASPECT_ROUND_TRIP).unwrap() - expected).abs() < 1e-7);
        }

        #[test]
        fn mix_construction(fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
            let sf = mix_fractions(fa, fb).unwrap();
            prop_assert_eq!(sf.f, (fa + fb) / 2.0);
            prop_assert_eq!(sf.f_prime, (fa - fb) / 2.0);
        }
    }
}
