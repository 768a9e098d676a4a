//! Frequency, sync-fraction and distance sweeps of S′ and S, extrema
//! location, and the reconstruction of the 1982 Aspect operating point.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choice::{
    mix_fractions, s_chsh_fc, s_chsh_fc_mixture, s_prime_fc_closed, s_prime_fc_mixture, s_prime_model,
    sync_fraction, ChoiceQuad, CoincidenceModel, StationConfig, StationWeights, SyncFractions,
    ASPECT_NU_ALICE, ASPECT_NU_BOB, ASPECT_ROUND_TRIP,
};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::montecarlo::{experiment_tally, EstimateWithError, McOptions, RngSpec, TimelineConfig};

/// Default number of grid points for a 0–100 MHz sweep (1/12 MHz spacing).
pub const DEFAULT_SWEEP_POINTS: usize = 1201;

/// S′ reported for the 1982 experiment and its quoted error.
pub const ASPECT_MEASURED_S_PRIME: f64 = 0.101;
pub const ASPECT_MEASURED_S_PRIME_ERROR: f64 = 0.020;
/// In-sync fractions quoted to two digits for the 1982 experiment.
pub const ASPECT_QUOTED_F_A: f64 = 0.97;
pub const ASPECT_QUOTED_F_B: f64 = 0.83;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    /// Both stations switch at x Hz.
    FrequencyCommon,
    /// Alice switches at x Hz; Bob keeps his configured frequency.
    FrequencyAliceOnly,
    /// f_A = f_B = x directly.
    FDirect,
    /// Alice's switch removed, Bob switches at x Hz, and the texture weights
    /// follow the configured distance ratio.
    DistanceRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    /// Grid points including both ends.
    pub points: usize,
    /// Station settings and schedules; the swept frequency overrides theirs.
    pub alice: StationConfig,
    pub bob: StationConfig,
    /// d_a / (d_a + d_b) for [`SweepVariable::DistanceRatio`]; ½ is equal weighting.
    pub distance_ratio: f64,
    pub monte_carlo: bool,
    pub mc_pairs_per_point: u64,
    /// Simulated seconds per Monte Carlo point.
    pub mc_duration: f64,
    pub rng: RngSpec,
}

impl SweepSpec {
    /// The common-frequency sweep over `start..=stop` Hz at the standard
    /// angles with a shared round trip. Bob's switch lags Alice's by a
    /// quarter cycle.
    pub fn common_frequency(start: f64, stop: f64, points: usize, round_trip_time: f64) -> Result<Self> {
        let q = ChoiceQuad::standard();
        Ok(SweepSpec {
            variable: SweepVariable::FrequencyCommon,
            start,
            stop,
            points,
            alice: StationConfig::new(q.a, q.a_alt, 0.0, 0.0, round_trip_time)?,
            // a quarter-cycle offset so all four setting pairs occur at a common frequency
            bob: StationConfig::new(q.b, q.b_alt, 0.0, FRAC_PI_2, round_trip_time)?,
            distance_ratio: 0.5,
            monte_carlo: false,
            mc_pairs_per_point: 0,
            mc_duration: 1e-3,
            rng: RngSpec::new(0, 0),
        })
    }

    pub fn quad(&self) -> ChoiceQuad {
        ChoiceQuad::new(
            self.alice.setting_1,
            self.bob.setting_1,
            self.alice.setting_2,
            self.bob.setting_2,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.alice.validate()?;
        self.bob.validate()?;
        let bad = |m: String| Err(Error::InvalidSweep(m));
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return bad(format!("need start < stop, got {}..{}", self.start, self.stop));
        }
        if self.points < 2 {
            return bad(format!("need at least 2 points, got {}", self.points));
        }
        match self.variable {
            SweepVariable::FDirect if self.start < 0.0 || self.stop > 1.0 => {
                return bad("sync fraction range must lie in [0, 1]".into());
            }
            SweepVariable::FrequencyCommon
            | SweepVariable::FrequencyAliceOnly
            | SweepVariable::DistanceRatio
                if self.start < 0.0 =>
            {
                return bad("frequencies must be >= 0".into());
            }
            _ => {}
        }
        StationWeights::from_distance_ratio(self.distance_ratio)?;
        if self.monte_carlo {
            if self.mc_pairs_per_point == 0 {
                return bad("monte carlo needs at least one pair per point".into());
            }
            if !(self.mc_duration.is_finite() && self.mc_duration > 0.0) {
                return Err(Error::InvalidDuration(self.mc_duration));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + k as f64 * step })
            .collect()
    }

    pub fn grid_step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    fn weights(&self) -> StationWeights {
        match self.variable {
            SweepVariable::DistanceRatio => {
                StationWeights::from_distance_ratio(self.distance_ratio).expect("validated ratio")
            }
            _ => StationWeights::default(),
        }
    }

    /// Station schedules at sweep position `x`.
    pub fn stations_at(&self, x: f64) -> (StationConfig, StationConfig) {
        let (mut a, mut b) = (self.alice, self.bob);
        match self.variable {
            SweepVariable::FrequencyCommon => {
                a.switch_frequency = x;
                b.switch_frequency = x;
            }
            SweepVariable::FrequencyAliceOnly => a.switch_frequency = x,
            SweepVariable::FDirect => {
                // smallest frequency whose square wave has in-sync fraction x
                a.switch_frequency = (1.0 - x) / (2.0 * a.round_trip_time);
                b.switch_frequency = (1.0 - x) / (2.0 * b.round_trip_time);
            }
            SweepVariable::DistanceRatio => {
                a.switch_frequency = 0.0;
                b.switch_frequency = x;
            }
        }
        (a, b)
    }

    /// In-sync fractions at sweep position `x`.
    pub fn fractions_at(&self, x: f64) -> Result<SyncFractions> {
        if self.variable == SweepVariable::FDirect {
            return mix_fractions(x, x);
        }
        let (a, b) = self.stations_at(x);
        Ok(SyncFractions::from_stations(&a, &b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub s_prime: f64,
    pub s_chsh: f64,
    pub mc_s_prime: Option<EstimateWithError>,
    pub mc_s_chsh: Option<EstimateWithError>,
}

/// Horizontal reference values drawn with a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLines {
    pub quantum_s_prime: f64,
    pub quantum_s_chsh: f64,
    pub semi_classical_s_prime: f64,
    pub semi_classical_s_chsh: f64,
    /// Local hidden variables satisfy lower ≤ S′ ≤ upper.
    pub lhv_s_prime: (f64, f64),
    /// Local hidden variables satisfy |S| ≤ this.
    pub lhv_s_chsh: f64,
}

impl ReferenceLines {
    pub fn standard() -> Self {
        let quad = ChoiceQuad::standard();
        let sc = CoincidenceModel::Fixed(ModelKind::SemiClassical);
        ReferenceLines {
            quantum_s_prime: s_prime_fc_closed(1.0).expect("f = 1"),
            quantum_s_chsh: 2.0 * SQRT_2,
            semi_classical_s_prime: s_prime_model(sc, &quad).expect("valid probabilities"),
            semi_classical_s_chsh: crate::choice::s_chsh_fixed(ModelKind::SemiClassical, &quad),
            lhv_s_prime: (-1.0, 0.0),
            lhv_s_chsh: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    pub reference_lines: ReferenceLines,
}

/// Closed-form S′ and S at given fractions.
pub fn closed_form_at(quad: &ChoiceQuad, sf: &SyncFractions, weights: StationWeights) -> Result<(f64, f64)> {
    if weights.is_equal() {
        let s_prime = s_prime_model(CoincidenceModel::FreedomOfChoice(*sf), quad)?;
        Ok((s_prime, s_chsh_fc(quad, sf)))
    } else {
        Ok((
            s_prime_fc_mixture(quad, sf, weights)?,
            s_chsh_fc_mixture(quad, sf, weights)?,
        ))
    }
}

fn evaluate(spec: &SweepSpec, index: usize, x: f64, opts: &McOptions) -> Result<SweepPoint> {
    let quad = spec.quad();
    let weights = spec.weights();
    let sf = spec.fractions_at(x)?;
    let (s_prime, s_chsh) = closed_form_at(&quad, &sf, weights)?;
    let mut point = SweepPoint {
        x,
        f_a: sf.f_a,
        f_b: sf.f_b,
        s_prime,
        s_chsh,
        mc_s_prime: None,
        mc_s_chsh: None,
    };
    if spec.monte_carlo {
        let (alice, bob) = spec.stations_at(x);
        let mut cfg = TimelineConfig::uniform(alice, bob, spec.mc_duration, spec.mc_pairs_per_point);
        cfg.weights = weights;
        let stream = spec.rng.stream_id.wrapping_add(2 * index as u32);
        let coincidences = experiment_tally(&cfg, spec.rng.with_stream(stream), opts)?;
        let singles = experiment_tally(&cfg, spec.rng.with_stream(stream.wrapping_add(1)), opts)?;
        point.mc_s_prime = Some(coincidences.s_prime(&singles)?);
        point.mc_s_chsh = Some(coincidences.s_chsh()?);
    }
    Ok(point)
}

/// Evaluates every grid point of `spec`. Points are computed in parallel and
/// returned in grid order; Monte Carlo point k uses streams derived from k.
pub fn run_sweep(spec: &SweepSpec, opts: &McOptions) -> Result<SweepSeries> {
    spec.validate()?;
    let grid = spec.grid();
    let points = opts.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(k, &x)| {
                evaluate(spec, k, x, &McOptions::default()).map_err(|e| Error::SweepPoint {
                    x,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(SweepSeries {
        spec: *spec,
        points,
        reference_lines: ReferenceLines::standard(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Values closer than this are treated as a plateau.
const PLATEAU_TOLERANCE: f64 = 1e-12;

/// Interior local extrema of `ys` over `xs`. Runs of equal values count
/// once, reported at their middle point; the ends of the series never count.
pub fn local_extrema(xs: &[f64], ys: &[f64]) -> Result<Vec<Extremum>> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::TooFewPoints(xs.len().min(ys.len())));
    }
    // (first index, last index) of each run of equal values
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        match runs.last_mut() {
            Some((_, end)) if (ys[*end] - y).abs() <= PLATEAU_TOLERANCE => *end = i,
            _ => runs.push((i, i)),
        }
    }
    let mut out = Vec::new();
    for w in runs.windows(3) {
        let (prev, cur, next) = (ys[w[0].0], ys[w[1].0], ys[w[2].0]);
        let kind = if cur > prev && cur > next {
            ExtremumKind::Max
        } else if cur < prev && cur < next {
            ExtremumKind::Min
        } else {
            continue;
        };
        let mid = (w[1].0 + w[1].1) / 2;
        out.push(Extremum {
            x: xs[mid],
            value: ys[mid],
            kind,
        });
    }
    Ok(out)
}

/// Local extrema of the closed-form S′ curve.
pub fn find_extrema(series: &SweepSeries) -> Result<Vec<Extremum>> {
    let xs: Vec<f64> = series.points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.s_prime).collect();
    local_extrema(&xs, &ys)
}

/// One set of fractions with the S′ and S they predict at the standard angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub fractions: SyncFractions,
    pub s_prime: f64,
    pub s_chsh: f64,
}

impl OperatingPoint {
    pub fn new(fractions: SyncFractions) -> Self {
        OperatingPoint {
            fractions,
            s_prime: s_prime_fc_closed(fractions.f).expect("f in [0, 1]"),
            s_chsh: s_chsh_fc(&ChoiceQuad::standard(), &fractions),
        }
    }
}

/// The 1982 experiment: switching frequencies, the fractions they imply,
/// and the predicted against the recorded S′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectReport {
    pub round_trip_time: f64,
    pub nu_alice: f64,
    pub nu_bob: f64,
    /// Fractions evaluated from the square-wave formula at the frequencies.
    pub computed: OperatingPoint,
    /// Fractions as quoted to two digits (0.97, 0.83).
    pub quoted: OperatingPoint,
    pub measured_s_prime: f64,
    pub measured_s_prime_error: f64,
}

impl AspectReport {
    /// |predicted − measured| for the quoted-fraction prediction.
    pub fn discrepancy(&self) -> f64 {
        (self.quoted.s_prime - self.measured_s_prime).abs()
    }
}

pub fn aspect_point() -> AspectReport {
    let f_a = sync_fraction(ASPECT_NU_ALICE, ASPECT_ROUND_TRIP).expect("valid constants");
    let f_b = sync_fraction(ASPECT_NU_BOB, ASPECT_ROUND_TRIP).expect("valid constants");
    AspectReport {
        round_trip_time: ASPECT_ROUND_TRIP,
        nu_alice: ASPECT_NU_ALICE,
        nu_bob: ASPECT_NU_BOB,
        computed: OperatingPoint::new(mix_fractions(f_a, f_b).expect("valid fractions")),
        quoted: OperatingPoint::new(
            mix_fractions(ASPECT_QUOTED_F_A, ASPECT_QUOTED_F_B).expect("valid fractions"),
        ),
        measured_s_prime: ASPECT_MEASURED_S_PRIME,
        measured_s_prime_error: ASPECT_MEASURED_S_PRIME_ERROR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(points: usize) -> SweepSpec {
        SweepSpec::common_frequency(0.0, 100e6, points, ASPECT_ROUND_TRIP).unwrap()
    }

    fn value_at(series: &SweepSeries, x: f64) -> f64 {
        series
            .points
            .iter()
            .min_by(|p, q| (p.x - x).abs().total_cmp(&(q.x - x).abs()))
            .unwrap()
            .s_prime
    }

    #[test]
    fn common_frequency_examples() {
        // grid containing the three frequencies exactly
        let mut spec = common(3);
        let opts = McOptions::default();
        for (nu, expected) in [
            (46.2e6, -0.5 + 0.9732 / SQRT_2),
            (1.0 / ASPECT_ROUND_TRIP, 0.5 / SQRT_2 * 2.0 - 0.5),
            (1.5 / ASPECT_ROUND_TRIP, -0.5),
        ] {
            spec.start = nu - 1.0;
            spec.stop = nu + 1.0;
            let series = run_sweep(&spec, &opts).unwrap();
            assert!((series.points[1].s_prime - expected).abs() < 1e-6, "{nu}");
        }
    }

    #[test]
    fn default_grid_extrema() {
        let series = run_sweep(&common(DEFAULT_SWEEP_POINTS), &McOptions::default()).unwrap();
        let ext = find_extrema(&series).unwrap();
        let period = 1.0 / ASPECT_ROUND_TRIP;
        let step = series.spec.grid_step();
        let maxima: Vec<_> = ext.iter().filter(|e| e.kind == ExtremumKind::Max).collect();
        let minima: Vec<_> = ext.iter().filter(|e| e.kind == ExtremumKind::Min).collect();
        assert_eq!(maxima.len(), 4);
        assert_eq!(minima.len(), 4);
        for (n, m) in maxima.iter().enumerate() {
            assert!((m.x - (n + 1) as f64 * period).abs() <= step);
        }
        for (n, m) in minima.iter().enumerate() {
            assert!((m.x - (n as f64 + 0.5) * period).abs() <= step);
        }
        assert!((value_at(&series, period) - 0.207).abs() < 1e-3);
    }

    #[test]
    fn constant_series_has_no_extrema() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert!(local_extrema(&xs, &[0.4; 4]).unwrap().is_empty());
        assert_eq!(local_extrema(&xs[..2], &[0.0, 1.0]), Err(Error::TooFewPoints(2)));
    }

    #[test]
    fn plateau_counts_once() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ext = local_extrema(&xs, &[0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].x, 2.0);
        // a step is not an extremum
        assert!(local_extrema(&xs, &[0.0, 1.0, 1.0, 2.0, 3.0]).unwrap().is_empty());
    }

    #[test]
    fn distance_ratio_limits() {
        let mut spec = common(601);
        spec.variable = SweepVariable::DistanceRatio;
        let opts = McOptions::default();
        spec.distance_ratio = 0.0;
        let flat = run_sweep(&spec, &opts).unwrap();
        assert!(find_extrema(&flat).unwrap().is_empty());
        spec.distance_ratio = 1.0;
        let full = run_sweep(&spec, &opts).unwrap();
        let ext = find_extrema(&full).unwrap();
        let maxima: Vec<f64> = ext.iter().filter(|e| e.kind == ExtremumKind::Max).map(|e| e.x).collect();
        assert!(maxima.len() >= 2);
        let spacing = maxima[1] - maxima[0];
        assert!((spacing - 1.0 / ASPECT_ROUND_TRIP).abs() <= 2.0 * spec.grid_step());
        let amplitude = |s: &SweepSeries| {
            let v: Vec<f64> = s.points.iter().map(|p| p.s_prime).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        spec.distance_ratio = 0.5;
        let half = run_sweep(&spec, &opts).unwrap();
        assert!(amplitude(&full) > amplitude(&half));
        assert!(amplitude(&half) > amplitude(&flat));
    }

    #[test]
    fn range_bounds() {
        let series = run_sweep(&common(DEFAULT_SWEEP_POINTS), &McOptions::default()).unwrap();
        for p in &series.points {
            assert!((-0.5 - 1e-12..=0.2072).contains(&p.s_prime));
            assert!((-1e-12..=2.0 * SQRT_2 + 1e-12).contains(&p.s_chsh));
        }
    }

    #[test]
    fn periodic_on_commensurate_grid() {
        let period = 1.0 / ASPECT_ROUND_TRIP;
        let mut spec = common(101);
        spec.start = 0.0;
        spec.stop = 2.0 * period;
        let series = run_sweep(&spec, &McOptions::default()).unwrap();
        for k in 0..50 {
            let (a, b) = (&series.points[k], &series.points[k + 50]);
            assert!((a.s_prime - b.s_prime).abs() < 1e-9 || k == 0);
        }
    }

    #[test]
    fn invalid_specs() {
        let mut spec = common(2);
        spec.stop = -1.0;
        assert!(matches!(run_sweep(&spec, &McOptions::default()), Err(Error::InvalidSweep(_))));
        let mut spec = common(1);
        assert!(spec.validate().is_err());
        spec.points = 5;
        spec.monte_carlo = true;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn monte_carlo_points_agree() {
        let mut spec = common(3);
        spec.start = 20e6;
        spec.stop = 40e6;
        spec.monte_carlo = true;
        spec.mc_pairs_per_point = 200_000;
        spec.rng = RngSpec::new(21, 0);
        let series = run_sweep(&spec, &McOptions::default()).unwrap();
        for p in &series.points {
            assert!(p.mc_s_prime.unwrap().within(p.s_prime, 4.0), "{p:?}");
            assert!(p.mc_s_chsh.unwrap().within(p.s_chsh, 4.0), "{p:?}");
        }
    }

    #[test]
    fn monte_carlo_with_a_fixed_station() {
        let mut spec = common(3);
        spec.variable = SweepVariable::DistanceRatio;
        spec.distance_ratio = 0.8;
        spec.start = 0.0;
        spec.stop = 30e6;
        spec.monte_carlo = true;
        spec.mc_pairs_per_point = 100_000;
        spec.rng = RngSpec::new(22, 0);
        let series = run_sweep(&spec, &McOptions::default()).unwrap();
        for p in &series.points {
            assert!(p.mc_s_prime.unwrap().within(p.s_prime, 4.0), "{p:?}");
            assert!(p.mc_s_chsh.unwrap().within(p.s_chsh, 4.0), "{p:?}");
        }
    }

    #[test]
    fn aspect_report() {
        let r = aspect_point();
        assert!((r.computed.fractions.f_a - 0.9732).abs() < 1e-9);
        assert!((r.computed.fractions.f_b - 0.8376).abs() < 1e-9);
        assert!((r.computed.fractions.f - 0.90).abs() < 0.01);
        assert!((r.quoted.fractions.f - 0.90).abs() < 1e-12);
        assert!((r.quoted.s_prime - 0.136).abs() < 5e-4);
        assert!((r.quoted.s_chsh - 2.0 * SQRT_2 * 0.9).abs() < 1e-12);
        assert!((r.discrepancy() - 0.035).abs() < 5e-4);
    }
}
