//! Count aggregation and the CHSH / S′ estimators built on it.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::estimate::{combine, EstimateWithError};
use super::rng::{run_batches, McOptions, RngSpec};
use super::sampling::{draw_outcome, sample_lambda};
use super::timeline::{pair_count, PairSampler, TimelineConfig, TrialRecord};
use crate::choice::{s_prime, ChoiceQuad, StationConfig, Switching};
use crate::error::{Error, Result};
use crate::models::{HvMixture, PolAngle};

/// Counts for one (Alice, Bob) arrival-setting pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingTally {
    pub pairs: u64,
    /// Σ αβ
    pub corr_sum: i64,
    /// # α = β = +1
    pub both_plus: u64,
    pub alice_plus: u64,
    pub bob_plus: u64,
}

impl SettingTally {
    fn add(&mut self, alpha: i8, beta: i8) {
        self.pairs += 1;
        self.corr_sum += i64::from(alpha * beta);
        self.both_plus += u64::from(alpha == 1 && beta == 1);
        self.alice_plus += u64::from(alpha == 1);
        self.bob_plus += u64::from(beta == 1);
    }
}

impl AddAssign for SettingTally {
    fn add_assign(&mut self, o: Self) {
        self.pairs += o.pairs;
        self.corr_sum += o.corr_sum;
        self.both_plus += o.both_plus;
        self.alice_plus += o.alice_plus;
        self.bob_plus += o.bob_plus;
    }
}

/// Aggregated counts of a run. Cell `[i][j]` holds pairs measured with
/// Alice's setting `i` (0 → `a`, 1 → `a_alt`) and Bob's setting `j`
/// (0 → `b`, 1 → `b_alt`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub quad: ChoiceQuad,
    pub cells: [[SettingTally; 2]; 2],
    pub alice_in_sync: u64,
    pub bob_in_sync: u64,
}

impl Tally {
    pub fn empty(quad: ChoiceQuad) -> Self {
        Tally {
            quad,
            cells: [[SettingTally::default(); 2]; 2],
            alice_in_sync: 0,
            bob_in_sync: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().map(|c| c.pairs).sum()
    }

    fn merge(&mut self, other: &Tally) {
        for (row, orow) in self.cells.iter_mut().zip(&other.cells) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += *o;
            }
        }
        self.alice_in_sync += other.alice_in_sync;
        self.bob_in_sync += other.bob_in_sync;
    }

    /// Tallies `records`, attributing each to a setting of `quad` by exact
    /// angle equality.
    pub fn from_records(records: &[TrialRecord], quad: &ChoiceQuad) -> Result<Self> {
        if quad.a == quad.a_alt || quad.b == quad.b_alt {
            return Err(Error::AmbiguousSettings);
        }
        let index = |x: PolAngle, first: PolAngle, second: PolAngle| -> Option<usize> {
            if x == first {
                Some(0)
            } else if x == second {
                Some(1)
            } else {
                None
            }
        };
        let mut t = Tally::empty(*quad);
        for r in records {
            // records measured at settings outside the quad are not part of the estimate
            let (Some(i), Some(j)) = (index(r.a_m, quad.a, quad.a_alt), index(r.b_m, quad.b, quad.b_alt)) else {
                continue;
            };
            t.cells[i][j].add(r.alpha, r.beta);
            t.alice_in_sync += u64::from(r.a_v == r.a_m);
            t.bob_in_sync += u64::from(r.b_v == r.b_m);
        }
        Ok(t)
    }

    fn cell(&self, i: usize, j: usize) -> Result<&SettingTally> {
        let c = &self.cells[i][j];
        if c.pairs == 0 {
            let a = if i == 0 { self.quad.a } else { self.quad.a_alt };
            let b = if j == 0 { self.quad.b } else { self.quad.b_alt };
            return Err(Error::EmptySettingPair {
                a: a.radians(),
                b: b.radians(),
            });
        }
        Ok(c)
    }

    /// Mean of αβ at arrival settings (i, j).
    pub fn correlation(&self, i: usize, j: usize) -> Result<EstimateWithError> {
        let c = self.cell(i, j)?;
        Ok(EstimateWithError::from_signed_sum(c.corr_sum, c.pairs))
    }

    /// N(x,y)/N(∞,∞): fraction of pairs at (i, j) with both detectors firing.
    pub fn coincidence(&self, i: usize, j: usize) -> Result<EstimateWithError> {
        let c = self.cell(i, j)?;
        Ok(EstimateWithError::from_proportion(c.both_plus, c.pairs))
    }

    /// Fraction of pairs with Alice's detector firing at her setting `i`.
    pub fn alice_single(&self, i: usize) -> Result<EstimateWithError> {
        let (hits, n) = self.cells[i]
            .iter()
            .fold((0, 0), |(h, n), c| (h + c.alice_plus, n + c.pairs));
        if n == 0 {
            return Err(Error::ZeroNormalization("Alice singles"));
        }
        Ok(EstimateWithError::from_proportion(hits, n))
    }

    /// Fraction of pairs with Bob's detector firing at his setting `j`.
    pub fn bob_single(&self, j: usize) -> Result<EstimateWithError> {
        let (hits, n) = self
            .cells
            .iter()
            .fold((0, 0), |(h, n), row| (h + row[j].bob_plus, n + row[j].pairs));
        if n == 0 {
            return Err(Error::ZeroNormalization("Bob singles"));
        }
        Ok(EstimateWithError::from_proportion(hits, n))
    }

    /// Empirical in-sync fractions (Alice, Bob).
    pub fn sync_fractions(&self) -> Result<(EstimateWithError, EstimateWithError)> {
        let n = self.total();
        if n == 0 {
            return Err(Error::ZeroNormalization("sync fractions"));
        }
        Ok((
            EstimateWithError::from_proportion(self.alice_in_sync, n),
            EstimateWithError::from_proportion(self.bob_in_sync, n),
        ))
    }

    /// |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)| with errors in quadrature.
    pub fn s_chsh(&self) -> Result<EstimateWithError> {
        let mut s = combine(&[
            (1.0, self.correlation(0, 0)?),
            (-1.0, self.correlation(0, 1)?),
            (1.0, self.correlation(1, 0)?),
            (1.0, self.correlation(1, 1)?),
        ]);
        s.value = s.value.abs();
        Ok(s)
    }

    /// S′ from this run's coincidences and the singles ratios of
    /// `singles` (Alice at a′, Bob at b).
    pub fn s_prime(&self, singles: &Tally) -> Result<EstimateWithError> {
        let n = [
            self.coincidence(0, 0)?,
            self.coincidence(0, 1)?,
            self.coincidence(1, 0)?,
            self.coincidence(1, 1)?,
        ];
        let s = [singles.alice_single(1)?, singles.bob_single(0)?];
        let value = s_prime(&n.map(|e| e.value), &s.map(|e| e.value))?;
        let est = combine(&[
            (1.0, n[0]),
            (-1.0, n[1]),
            (1.0, n[2]),
            (1.0, n[3]),
            (-1.0, s[0]),
            (-1.0, s[1]),
        ]);
        Ok(EstimateWithError { value, ..est })
    }
}

/// CHSH estimate from timeline records grouped by arrival settings.
pub fn estimate_s_chsh(records: &[TrialRecord], quad: &ChoiceQuad) -> Result<EstimateWithError> {
    Tally::from_records(records, quad)?.s_chsh()
}

/// S′ estimate from coincidence records and a separate set of records used
/// for the single-detector normalizations.
pub fn estimate_s_prime(
    records: &[TrialRecord],
    singles_records: &[TrialRecord],
    quad: &ChoiceQuad,
) -> Result<EstimateWithError> {
    let coincidences = Tally::from_records(records, quad)?;
    let singles = Tally::from_records(singles_records, quad)?;
    coincidences.s_prime(&singles)
}

/// The settings of a timeline's two stations as a quad.
pub fn station_quad(cfg: &TimelineConfig) -> ChoiceQuad {
    ChoiceQuad::new(
        cfg.alice.setting_1,
        cfg.bob.setting_1,
        cfg.alice.setting_2,
        cfg.bob.setting_2,
    )
}

/// Runs the timeline without materializing records. Draws exactly the same
/// samples as [`run_timeline`](super::run_timeline) for the same inputs.
pub fn timeline_tally(cfg: &TimelineConfig, spec: RngSpec, opts: &McOptions) -> Result<Tally> {
    let n = pair_count(cfg, spec)?;
    let sampler = PairSampler::new(cfg)?;
    let quad = station_quad(cfg);
    let parts = run_batches(n, spec, opts, |_, len, rng| {
        let mut t = Tally::empty(quad);
        for _ in 0..len {
            let e = sampler.sample(rng);
            t.cells[e.alice.arrival][e.bob.arrival].add(e.alpha, e.beta);
            t.alice_in_sync += u64::from(e.alice.in_sync());
            t.bob_in_sync += u64::from(e.bob.in_sync());
        }
        t
    })?;
    let mut total = Tally::empty(quad);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

fn holds_setting(s: &StationConfig) -> bool {
    s.switching == Switching::Periodic && s.switch_frequency == 0.0
}

/// Like [`timeline_tally`], but a station that never switches (periodic
/// at zero frequency) is measured as in a static experiment: one run per
/// setting it can hold, each with the full schedule, merged into one tally.
/// Runs where both stations switch are identical to [`timeline_tally`].
pub fn experiment_tally(cfg: &TimelineConfig, spec: RngSpec, opts: &McOptions) -> Result<Tally> {
    let holds = [holds_setting(&cfg.alice), holds_setting(&cfg.bob)];
    if holds == [false, false] {
        return timeline_tally(cfg, spec, opts);
    }
    let quad = station_quad(cfg);
    let held = |s: &StationConfig, h: usize| StationConfig {
        setting_1: s.setting(h),
        setting_2: s.setting(1 - h),
        ..*s
    };
    let mut total = Tally::empty(quad);
    let alice_choices: &[usize] = if holds[0] { &[0, 1] } else { &[0] };
    let bob_choices: &[usize] = if holds[1] { &[0, 1] } else { &[0] };
    for &ha in alice_choices {
        for &hb in bob_choices {
            let sub_cfg = TimelineConfig {
                alice: if holds[0] { held(&cfg.alice, ha) } else { cfg.alice },
                bob: if holds[1] { held(&cfg.bob, hb) } else { cfg.bob },
                ..*cfg
            };
            let stream = spec.stream_id.wrapping_mul(4).wrapping_add((2 * ha + hb) as u32);
            let sub = timeline_tally(&sub_cfg, spec.with_stream(stream), opts)?;
            // sub-run index 0 is the held setting h, index 1 the other one
            let map = |held: bool, h: usize, k: usize| if held && h == 1 { 1 - k } else { k };
            for i in 0..2 {
                for j in 0..2 {
                    total.cells[map(holds[0], ha, i)][map(holds[1], hb, j)] += sub.cells[i][j];
                }
            }
            total.alice_in_sync += sub.alice_in_sync;
            total.bob_in_sync += sub.bob_in_sync;
        }
    }
    Ok(total)
}

/// Runs `n_per_pair` trials at each of the four setting pairs of `quad`
/// with a setting-independent hidden variable `q`.
pub fn static_tally(
    quad: &ChoiceQuad,
    q: &HvMixture,
    n_per_pair: u64,
    spec: RngSpec,
    opts: &McOptions,
) -> Result<Tally> {
    if n_per_pair == 0 {
        return Err(Error::NoTrials);
    }
    q.check_normalized()?;
    let mut total = Tally::empty(*quad);
    let alice = [quad.a, quad.a_alt];
    let bob = [quad.b, quad.b_alt];
    for i in 0..2 {
        for j in 0..2 {
            let stream = spec.stream_id.wrapping_mul(4).wrapping_add((2 * i + j) as u32);
            let cells = run_batches(n_per_pair, spec.with_stream(stream), opts, |_, len, rng| {
                let mut c = SettingTally::default();
                for _ in 0..len {
                    let l = sample_lambda(q, rng);
                    c.add(draw_outcome(alice[i], l, rng), draw_outcome(bob[j], l, rng));
                }
                c
            })?;
            for c in cells {
                total.cells[i][j] += c;
            }
        }
    }
    let n = total.total();
    total.alice_in_sync = n;
    total.bob_in_sync = n;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{StationConfig, ASPECT_ROUND_TRIP};
    use crate::montecarlo::run_timeline;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    fn stations(nu_a: f64, nu_b: f64) -> (StationConfig, StationConfig) {
        let q = ChoiceQuad::standard();
        (
            StationConfig::new(q.a, q.a_alt, nu_a, 0.0, ASPECT_ROUND_TRIP).unwrap(),
            StationConfig::new(q.b, q.b_alt, nu_b, 0.3, ASPECT_ROUND_TRIP).unwrap(),
        )
    }

    #[test]
    fn tally_matches_records() {
        let (a, b) = stations(46.2e6, 48.4e6);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 100_000);
        let spec = RngSpec::new(9, 1);
        let opts = McOptions::default();
        let recs = run_timeline(&cfg, spec, &opts).unwrap();
        let from_records = Tally::from_records(&recs, &station_quad(&cfg)).unwrap();
        let streamed = timeline_tally(&cfg, spec, &opts).unwrap();
        assert_eq!(from_records, streamed);
    }

    #[test]
    fn in_sync_timeline_gives_quantum_chsh() {
        let nu = 1.0 / ASPECT_ROUND_TRIP;
        let (a, b) = stations(nu, 2.0 * nu);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 400_000);
        let t = timeline_tally(&cfg, RngSpec::new(10, 0), &McOptions::default()).unwrap();
        let s = t.s_chsh().unwrap();
        assert!(s.within(2.0 * SQRT_2, 4.0), "{s:?}");
    }

    #[test]
    fn missing_setting_pair_is_an_error() {
        let (a, b) = stations(0.0, 0.0);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 1000);
        let recs = run_timeline(&cfg, RngSpec::new(11, 0), &McOptions::default()).unwrap();
        let err = estimate_s_chsh(&recs, &station_quad(&cfg)).unwrap_err();
        assert!(matches!(err, Error::EmptySettingPair { .. }));
    }

    #[test]
    fn static_stations_measured_per_setting() {
        let (a, b) = stations(0.0, 0.0);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 200_000);
        let t = experiment_tally(&cfg, RngSpec::new(14, 0), &McOptions::default()).unwrap();
        assert_eq!(t.total(), 800_000);
        assert!(t.cells.iter().flatten().all(|c| c.pairs == 200_000));
        assert!(t.s_chsh().unwrap().within(2.0 * SQRT_2, 4.0));
        // one station switching: two runs, each covering both of its settings
        let (a, b) = stations(0.0, 31e6);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 200_000);
        let t = experiment_tally(&cfg, RngSpec::new(15, 0), &McOptions::default()).unwrap();
        assert_eq!(t.total(), 400_000);
        assert_eq!(t.cells[0][0].pairs + t.cells[0][1].pairs, 200_000);
        // switching stations take the single-run path
        let (a, b) = stations(46.2e6, 48.4e6);
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 10_000);
        let spec = RngSpec::new(16, 0);
        let opts = McOptions::default();
        assert_eq!(experiment_tally(&cfg, spec, &opts).unwrap(), timeline_tally(&cfg, spec, &opts).unwrap());
    }

    #[test]
    fn ambiguous_quad_rejected() {
        let q = ChoiceQuad::new(PolAngle::ZERO, PolAngle::ZERO, PolAngle::ZERO, PolAngle::rad(FRAC_PI_8));
        assert_eq!(Tally::from_records(&[], &q), Err(Error::AmbiguousSettings));
    }

    #[test]
    fn semi_classical_static_s_prime() {
        let quad = ChoiceQuad::standard();
        let opts = McOptions::default();
        let t = static_tally(&quad, &HvMixture::uniform(), 250_000, RngSpec::new(12, 0), &opts).unwrap();
        let singles = static_tally(&quad, &HvMixture::uniform(), 250_000, RngSpec::new(12, 1), &opts).unwrap();
        let s = t.s_prime(&singles).unwrap();
        // (2 + cos 2Δ)/8 with cos 2Δ = (√2/2, −√2/2, √2/2, √2/2), signs (+,−,+,+), minus 1
        let target = -0.5 + SQRT_2 / 4.0;
        assert!(s.within(target, 4.0), "{s:?} vs {target}");
    }

    #[test]
    fn singles_are_half_for_any_texture() {
        let quad = ChoiceQuad::new(PolAngle::rad(0.1), PolAngle::rad(0.5), PolAngle::rad(0.1 + FRAC_PI_4), PolAngle::rad(-0.9));
        let (a, b) = (
            StationConfig::new(quad.a, quad.a_alt, 31e6, 0.0, ASPECT_ROUND_TRIP).unwrap(),
            StationConfig::new(quad.b, quad.b_alt, 17e6, 1.0, ASPECT_ROUND_TRIP).unwrap(),
        );
        let cfg = TimelineConfig::uniform(a, b, 1e-3, 400_000);
        let t = timeline_tally(&cfg, RngSpec::new(13, 0), &McOptions::default()).unwrap();
        for i in 0..2 {
            assert!(t.alice_single(i).unwrap().within(0.5, 4.0));
            assert!(t.bob_single(i).unwrap().within(0.5, 4.0));
        }
    }
}
