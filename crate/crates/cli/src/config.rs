//! Run configuration: a TOML file mirroring the command-line flags. Flags
//! override file values, and every command writes back the values it
//! actually used in canonical units, which is what output headers embed.

use std::path::Path;

use bellvt::choice::{StationConfig, StationWeights, Switching};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::units::{fmt_hz, fmt_radians, fmt_seconds, parse_angle, parse_angle_radians, parse_frequency, parse_time};

/// Seed used when none is given, so runs are reproducible by default.
pub const DEFAULT_SEED: u64 = 1982;

pub const DEFAULT_ROUND_TRIP: &str = "43ns";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLines,
    SvgPlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClosedForm,
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn closed_form(self) -> bool {
        self != Engine::MonteCarlo
    }

    pub fn monte_carlo(self) -> bool {
        self != Engine::ClosedForm
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "StationsSection::is_empty")]
    pub stations: StationsSection,
    #[serde(skip_serializing_if = "CurvesSection::is_empty")]
    pub curves: CurvesSection,
    #[serde(skip_serializing_if = "BellSection::is_empty")]
    pub bell: BellSection,
    #[serde(skip_serializing_if = "SweepSection::is_empty")]
    pub sweep: SweepSection,
    #[serde(skip_serializing_if = "TrialsSection::is_empty")]
    pub trials: TrialsSection,
}

macro_rules! section {
    ($name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $(
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            pub fn is_empty(&self) -> bool {
                *self == Self::default()
            }
        }
    };
}

section!(StationSection {
    settings: Vec<String>,
    frequency: String,
    phase: String,
    switching: Switching,
    round_trip: String,
});

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationsSection {
    /// Shared round trip, used where a station gives none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip: Option<String>,
    /// d_a / (d_a + d_b); ½ weights both stations equally.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_ratio: Option<f64>,
    #[serde(skip_serializing_if = "StationSection::is_empty")]
    pub alice: StationSection,
    #[serde(skip_serializing_if = "StationSection::is_empty")]
    pub bob: StationSection,
}

impl StationsSection {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

section!(CurvesSection {
    models: Vec<String>,
    start: String,
    stop: String,
    points: usize,
});

section!(BellSection {
    form: String,
    model: String,
    f: f64,
    f_a: f64,
    f_b: f64,
    engine: Engine,
    pairs: u64,
    duration: String,
});

section!(SweepSection {
    variable: String,
    start: String,
    stop: String,
    points: usize,
    engine: Engine,
    mc_pairs: u64,
    mc_duration: String,
});

section!(TrialsSection {
    n: u64,
    rate: String,
    duration: String,
});

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn resolve_seed(&mut self) -> u64 {
        *self.seed.get_or_insert(DEFAULT_SEED)
    }

    /// Both stations with defaults filled in: the standard CHSH angles,
    /// the 1982 switching frequencies, a 43 ns round trip, and Bob's switch
    /// a quarter cycle behind Alice's.
    pub fn resolve_stations(&mut self) -> Result<(StationConfig, StationConfig, StationWeights), CliError> {
        let st = &mut self.stations;
        let shared = parse_time(st.round_trip.get_or_insert_with(|| DEFAULT_ROUND_TRIP.into()))?;
        st.round_trip = Some(fmt_seconds(shared));
        let alice = resolve_station(&mut st.alice, shared, ["0deg", "45deg"], "46.2MHz", "0deg")?;
        let bob = resolve_station(&mut st.bob, shared, ["22.5deg", "67.5deg"], "48.4MHz", "90deg")?;
        let ratio = *st.distance_ratio.get_or_insert(0.5);
        Ok((alice, bob, StationWeights::from_distance_ratio(ratio)?))
    }
}

fn resolve_station(
    s: &mut StationSection,
    shared_round_trip: f64,
    settings: [&str; 2],
    frequency: &str,
    phase: &str,
) -> Result<StationConfig, CliError> {
    let raw = s.settings.get_or_insert_with(|| settings.iter().map(|x| x.to_string()).collect());
    if raw.len() != 2 {
        return Err(CliError::Validation(format!(
            "a station needs exactly 2 settings, got {}",
            raw.len()
        )));
    }
    let s1 = parse_angle(&raw[0])?;
    let s2 = parse_angle(&raw[1])?;
    *raw = vec![fmt_radians(s1.radians()), fmt_radians(s2.radians())];
    let nu = parse_frequency(s.frequency.get_or_insert_with(|| frequency.into()))?;
    s.frequency = Some(fmt_hz(nu));
    let ph = parse_angle_radians(s.phase.get_or_insert_with(|| phase.into()))?;
    s.phase = Some(fmt_radians(ph));
    let rtt = match &s.round_trip {
        Some(t) => parse_time(t)?,
        None => shared_round_trip,
    };
    s.round_trip = Some(fmt_seconds(rtt));
    let switching = *s.switching.get_or_insert(Switching::Periodic);
    let mut cfg = StationConfig::new(s1, s2, nu, ph, rtt)?;
    cfg.switching = switching;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_layout() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 7
            format = "json-lines"
            [stations]
            round_trip = "43ns"
            [stations.alice]
            settings = ["0deg", "45deg"]
            frequency = "46.2MHz"
            [stations.bob]
            frequency = "48.4e6"
            switching = "random"
            [sweep]
            variable = "frequency-common"
            engine = "both"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.sweep.engine, Some(Engine::Both));
        assert_eq!(cfg.stations.bob.switching, Some(Switching::Random));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sede = 1").is_err());
    }

    #[test]
    fn resolution_is_idempotent() {
        let mut cfg = RunConfig::default();
        cfg.stations.alice.settings = Some(vec!["10deg".into(), "100deg".into()]);
        let first = cfg.resolve_stations().unwrap();
        let snapshot = cfg.clone();
        let second = cfg.resolve_stations().unwrap();
        assert_eq!(first, second);
        assert_eq!(cfg, snapshot);
        // 100° folds to −80°
        assert!((first.0.setting_2.degrees() + 80.0).abs() < 1e-12);
    }

    #[test]
    fn degree_and_radian_inputs_agree() {
        let mut a = RunConfig::default();
        a.stations.bob.settings = Some(vec!["30deg".into(), "75deg".into()]);
        let mut b = RunConfig::default();
        b.stations.bob.settings = Some(vec![
            format!("{}rad", 30f64.to_radians()),
            format!("{}rad", 75f64.to_radians()),
        ]);
        let (_, x, _) = a.resolve_stations().unwrap();
        let (_, y, _) = b.resolve_stations().unwrap();
        assert!((x.setting_1.radians() - y.setting_1.radians()).abs() < 1e-12);
        assert!((x.setting_2.radians() - y.setting_2.radians()).abs() < 1e-12);
    }
}
