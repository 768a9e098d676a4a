//! Event-level simulation of a switched Bell experiment.
//!
//! For a pair emitted at time `t`, each station's setting is read twice:
//! when the texture leaves the station (`t − d/c`, it reaches the source at
//! the emission instant) and when the photon arrives (`t + d/c`). The hidden
//! variable is drawn from the texture mixture of the departure settings and
//! the outcomes from Malus's law at the arrival settings.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::rng::{run_batches, McOptions, RngSpec};
use super::sampling::{draw_outcome, sample_lambda};
use crate::choice::{pair_mixture, StationConfig, StationWeights, Switching};
use crate::error::{Error, Result};
use crate::models::{HvMixture, PolAngle};

/// One simulated photon pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub lambda: PolAngle,
    /// Alice's setting when the texture departed.
    pub a_v: PolAngle,
    /// Bob's setting when the texture departed.
    pub b_v: PolAngle,
    /// Alice's setting when the photon arrived.
    pub a_m: PolAngle,
    /// Bob's setting when the photon arrived.
    pub b_m: PolAngle,
    pub alpha: i8,
    pub beta: i8,
    pub emission_time: f64,
}

/// How emission times are generated over the run duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EmissionSchedule {
    /// Exactly `n_pairs` emissions at independent uniform times.
    Uniform { n_pairs: u64 },
    /// A Poisson process of the given rate (Hz); the pair count is random.
    Poisson { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineConfig {
    pub alice: StationConfig,
    pub bob: StationConfig,
    #[serde(default)]
    pub weights: StationWeights,
    /// Seconds.
    pub duration: f64,
    pub schedule: EmissionSchedule,
}

impl TimelineConfig {
    pub fn uniform(alice: StationConfig, bob: StationConfig, duration: f64, n_pairs: u64) -> Self {
        TimelineConfig {
            alice,
            bob,
            weights: StationWeights::default(),
            duration,
            schedule: EmissionSchedule::Uniform { n_pairs },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alice.validate()?;
        self.bob.validate()?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidDuration(self.duration));
        }
        match self.schedule {
            EmissionSchedule::Uniform { n_pairs: 0 } => Err(Error::NoTrials),
            EmissionSchedule::Poisson { rate } if !(rate.is_finite() && rate > 0.0) => {
                Err(Error::InvalidRate(rate))
            }
            _ => Ok(()),
        }
    }
}

/// Stream reserved for the Poisson pair count, apart from the batch streams.
const COUNT_STREAM_BATCH: u32 = u32::MAX;

/// Number of pairs the run will emit.
pub fn pair_count(cfg: &TimelineConfig, spec: RngSpec) -> Result<u64> {
    cfg.validate()?;
    match cfg.schedule {
        EmissionSchedule::Uniform { n_pairs } => Ok(n_pairs),
        EmissionSchedule::Poisson { rate } => {
            let mean = rate * cfg.duration;
            let dist = Poisson::new(mean).map_err(|_| Error::InvalidRate(rate))?;
            let n = dist.sample(&mut spec.batch_rng(COUNT_STREAM_BATCH)) as u64;
            if n == 0 {
                Err(Error::NoTrials)
            } else {
                Ok(n)
            }
        }
    }
}

/// Setting indices (0 → setting_1, 1 → setting_2) of one station at texture
/// departure and photon arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Reading {
    pub departure: usize,
    pub arrival: usize,
}

impl Reading {
    pub fn in_sync(&self) -> bool {
        self.departure == self.arrival
    }
}

fn read_station(station: &StationConfig, t: f64, rng: &mut ChaCha8Rng) -> Reading {
    match station.switching {
        Switching::Periodic => {
            let d = station.one_way_time();
            Reading {
                departure: station.periodic_index(t - d),
                arrival: station.periodic_index(t + d),
            }
        }
        Switching::Random => Reading {
            departure: usize::from(rng.random::<bool>()),
            arrival: usize::from(rng.random::<bool>()),
        },
    }
}

/// Per-run sampler with the four departure-setting mixtures precomputed.
pub(crate) struct PairSampler {
    cfg: TimelineConfig,
    mixtures: [[HvMixture; 2]; 2],
}

/// One sampled pair in index form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairEvent {
    pub time: f64,
    pub alice: Reading,
    pub bob: Reading,
    pub lambda: PolAngle,
    pub alpha: i8,
    pub beta: i8,
}

impl PairSampler {
    pub fn new(cfg: &TimelineConfig) -> Result<Self> {
        cfg.validate()?;
        let (a, b) = (&cfg.alice, &cfg.bob);
        let mix = |i: usize, j: usize| pair_mixture(a.setting(i), b.setting(j), cfg.weights);
        Ok(PairSampler {
            cfg: *cfg,
            mixtures: [[mix(0, 0)?, mix(0, 1)?], [mix(1, 0)?, mix(1, 1)?]],
        })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> PairEvent {
        let time = self.cfg.duration * rng.random::<f64>();
        let alice = read_station(&self.cfg.alice, time, rng);
        let bob = read_station(&self.cfg.bob, time, rng);
        let lambda = sample_lambda(&self.mixtures[alice.departure][bob.departure], rng);
        let alpha = draw_outcome(self.cfg.alice.setting(alice.arrival), lambda, rng);
        let beta = draw_outcome(self.cfg.bob.setting(bob.arrival), lambda, rng);
        PairEvent {
            time,
            alice,
            bob,
            lambda,
            alpha,
            beta,
        }
    }

    pub fn record(&self, e: &PairEvent) -> TrialRecord {
        let (a, b) = (&self.cfg.alice, &self.cfg.bob);
        TrialRecord {
            lambda: e.lambda,
            a_v: a.setting(e.alice.departure),
            b_v: b.setting(e.bob.departure),
            a_m: a.setting(e.alice.arrival),
            b_m: b.setting(e.bob.arrival),
            alpha: e.alpha,
            beta: e.beta,
            emission_time: e.time,
        }
    }
}

/// Simulates the run and returns every pair, ordered by emission time.
/// The output depends only on `cfg` and `spec`, not on the worker count.
pub fn run_timeline(cfg: &TimelineConfig, spec: RngSpec, opts: &McOptions) -> Result<Vec<TrialRecord>> {
    let n = pair_count(cfg, spec)?;
    let sampler = PairSampler::new(cfg)?;
    let batches = run_batches(n, spec, opts, |_, len, rng| {
        (0..len)
            .map(|_| sampler.record(&sampler.sample(rng)))
            .collect::<Vec<_>>()
    })?;
    let mut records: Vec<TrialRecord> = batches.into_iter().flatten().collect();
    records.sort_by(|x, y| x.emission_time.total_cmp(&y.emission_time));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{sync_fraction, ASPECT_NU_ALICE, ASPECT_ROUND_TRIP};
    use std::f64::consts::FRAC_PI_4;

    fn station(nu: f64) -> StationConfig {
        StationConfig::new(PolAngle::ZERO, PolAngle::rad(FRAC_PI_4), nu, 0.0, ASPECT_ROUND_TRIP).unwrap()
    }

    #[test]
    fn fixed_stations_never_switch() {
        let cfg = TimelineConfig::uniform(station(0.0), station(0.0), 1e-3, 10_000);
        let recs = run_timeline(&cfg, RngSpec::new(1, 0), &McOptions::default()).unwrap();
        assert_eq!(recs.len(), 10_000);
        assert!(recs.iter().all(|r| r.a_v == r.a_m && r.b_v == r.b_m));
        assert!(recs.iter().all(|r| r.alpha.abs() == 1 && r.beta.abs() == 1));
        assert!(recs.windows(2).all(|w| w[0].emission_time <= w[1].emission_time));
    }

    #[test]
    fn whole_cycle_round_trip_stays_in_sync() {
        let nu = 1.0 / ASPECT_ROUND_TRIP;
        let cfg = TimelineConfig::uniform(station(nu), station(2.0 * nu), 1e-3, 20_000);
        let recs = run_timeline(&cfg, RngSpec::new(2, 0), &McOptions::default()).unwrap();
        let out = recs.iter().filter(|r| r.a_v != r.a_m).count();
        // only pairs within rounding distance of a transition can disagree
        assert!(out <= 2, "{out}");
    }

    #[test]
    fn departure_fraction_matches_square_wave() {
        let cfg = TimelineConfig::uniform(station(ASPECT_NU_ALICE), station(0.0), 1e-3, 200_000);
        let recs = run_timeline(&cfg, RngSpec::new(3, 0), &McOptions::default()).unwrap();
        let f = recs.iter().filter(|r| r.a_v == r.a_m).count() as f64 / recs.len() as f64;
        let expected = sync_fraction(ASPECT_NU_ALICE, ASPECT_ROUND_TRIP).unwrap();
        assert!((f - expected).abs() < 0.003, "{f} vs {expected}");
    }

    #[test]
    fn poisson_schedule() {
        let mut cfg = TimelineConfig::uniform(station(1e6), station(2e6), 1e-3, 1);
        cfg.schedule = EmissionSchedule::Poisson { rate: 5e6 };
        let spec = RngSpec::new(4, 0);
        let n = pair_count(&cfg, spec).unwrap();
        assert!((n as f64 - 5000.0).abs() < 5.0 * 5000f64.sqrt());
        let recs = run_timeline(&cfg, spec, &McOptions::default()).unwrap();
        assert_eq!(recs.len() as u64, n);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = TimelineConfig::uniform(station(1e6), station(1e6), 0.0, 10);
        assert_eq!(run_timeline(&cfg, RngSpec::new(0, 0), &McOptions::default()), Err(Error::InvalidDuration(0.0)));
        cfg.duration = 1.0;
        cfg.schedule = EmissionSchedule::Uniform { n_pairs: 0 };
        assert_eq!(cfg.validate(), Err(Error::NoTrials));
        cfg.schedule = EmissionSchedule::Poisson { rate: -1.0 };
        assert_eq!(cfg.validate(), Err(Error::InvalidRate(-1.0)));
    }

    #[test]
    fn thread_count_does_not_change_records() {
        let cfg = TimelineConfig::uniform(station(ASPECT_NU_ALICE), station(48.4e6), 1e-3, 150_000);
        let spec = RngSpec::new(5, 2);
        let one = run_timeline(&cfg, spec, &McOptions::workers(1)).unwrap();
        let three = run_timeline(&cfg, spec, &McOptions::workers(3)).unwrap();
        assert_eq!(one, three);
    }
}
