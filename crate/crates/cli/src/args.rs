use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Engine, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "bellvt", version, about = "Vacuum-texture Bell-inequality simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed (defaults to a fixed constant).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot here (curves and sweep).
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation versus setting difference for the four models.
    Curves(CurvesArgs),
    /// CHSH S or Aspect S′ with its components.
    Bell(BellArgs),
    /// Sweep S′ and S over frequency, sync fraction or distance.
    Sweep(SweepArgs),
    /// In-sync fractions for the configured stations.
    Sync(StationArgs),
    /// The 1982 Aspect reconstruction against the recorded value.
    Aspect,
    /// Write simulated trial records.
    ExportTrials(TrialsArgs),
    /// Re-run the command recorded in an output file's provenance header.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curves(_) => "curves",
            Command::Bell(_) => "bell",
            Command::Sweep(a) if a.preset.as_deref() == Some("aspect") => "aspect",
            Command::Sweep(_) => "sweep",
            Command::Sync(_) => "sync",
            Command::Aspect => "aspect",
            Command::ExportTrials(_) => "export-trials",
            Command::Replay(_) => "replay",
        }
    }

    /// Copies the flags given into `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Curves(a) => a.apply(cfg),
            Command::Bell(a) => a.apply(cfg),
            Command::Sweep(a) => a.apply(cfg),
            Command::Sync(a) => a.apply(cfg),
            Command::ExportTrials(a) => a.apply(cfg),
            Command::Aspect | Command::Replay(_) => {}
        }
    }
}

fn set<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if let Some(v) = flag {
        *slot = Some(v.clone());
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct StationArgs {
    /// Round trip 2d/c shared by both stations, e.g. 43ns.
    #[arg(long, allow_hyphen_values = true)]
    pub round_trip: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alice_round_trip: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub bob_round_trip: Option<String>,
    /// Alice's two settings, e.g. 0deg,45deg.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alice_settings: Option<Vec<String>>,
    /// Bob's two settings, e.g. 22.5deg,67.5deg.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bob_settings: Option<Vec<String>>,
    /// e.g. 46.2MHz, 46.2e6 or 46200000.
    #[arg(long)]
    pub alice_frequency: Option<String>,
    #[arg(long)]
    pub bob_frequency: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alice_phase: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub bob_phase: Option<String>,
    #[arg(long, value_parser = parse_switching)]
    pub alice_switching: Option<bellvt::choice::Switching>,
    #[arg(long, value_parser = parse_switching)]
    pub bob_switching: Option<bellvt::choice::Switching>,
    /// d_a / (d_a + d_b) weighting the two stations' texture.
    #[arg(long)]
    pub distance_ratio: Option<f64>,
}

fn parse_switching(s: &str) -> Result<bellvt::choice::Switching, String> {
    match s {
        "periodic" => Ok(bellvt::choice::Switching::Periodic),
        "random" => Ok(bellvt::choice::Switching::Random),
        other => Err(format!("expected periodic or random, got {other:?}")),
    }
}

impl StationArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let st = &mut cfg.stations;
        set(&mut st.round_trip, &self.round_trip);
        set(&mut st.distance_ratio, &self.distance_ratio);
        set(&mut st.alice.round_trip, &self.alice_round_trip);
        set(&mut st.bob.round_trip, &self.bob_round_trip);
        set(&mut st.alice.settings, &self.alice_settings);
        set(&mut st.bob.settings, &self.bob_settings);
        set(&mut st.alice.frequency, &self.alice_frequency);
        set(&mut st.bob.frequency, &self.bob_frequency);
        set(&mut st.alice.phase, &self.alice_phase);
        set(&mut st.bob.phase, &self.bob_phase);
        set(&mut st.alice.switching, &self.alice_switching);
        set(&mut st.bob.switching, &self.bob_switching);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CurvesArgs {
    /// Comma-separated subset of qm, sc, mclhv, vt.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// First setting difference a − b, e.g. 0deg.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
}

impl CurvesArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let c = &mut cfg.curves;
        set(&mut c.models, &self.models);
        set(&mut c.start, &self.start);
        set(&mut c.stop, &self.stop);
        set(&mut c.points, &self.points);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct BellArgs {
    /// s (CHSH) or s-prime (Aspect form).
    #[arg(long)]
    pub form: Option<String>,
    /// fc (vacuum texture with switching) or a fixed model: qm, sc, mclhv, vt.
    #[arg(long)]
    pub model: Option<String>,
    /// Override both stations' in-sync fraction.
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub f_a: Option<f64>,
    #[arg(long)]
    pub f_b: Option<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    /// Monte Carlo pairs.
    #[arg(long)]
    pub pairs: Option<u64>,
    /// Simulated run length for Monte Carlo, e.g. 1ms.
    #[arg(long)]
    pub duration: Option<String>,
    #[command(flatten)]
    pub stations: StationArgs,
}

impl BellArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let b = &mut cfg.bell;
        set(&mut b.form, &self.form);
        set(&mut b.model, &self.model);
        set(&mut b.f, &self.f);
        set(&mut b.f_a, &self.f_a);
        set(&mut b.f_b, &self.f_b);
        set(&mut b.engine, &self.engine);
        set(&mut b.pairs, &self.pairs);
        set(&mut b.duration, &self.duration);
        self.stations.apply(cfg);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// frequency-common, frequency-alice-only, f-direct or distance-ratio.
    #[arg(long)]
    pub variable: Option<String>,
    /// Range start: a frequency, or a fraction for f-direct.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub stop: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long)]
    pub mc_pairs: Option<u64>,
    #[arg(long)]
    pub mc_duration: Option<String>,
    /// `aspect` reports the 1982 operating point instead of sweeping.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub stations: StationArgs,
}

impl SweepArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.sweep;
        set(&mut s.variable, &self.variable);
        set(&mut s.start, &self.start);
        set(&mut s.stop, &self.stop);
        set(&mut s.points, &self.points);
        set(&mut s.engine, &self.engine);
        set(&mut s.mc_pairs, &self.mc_pairs);
        set(&mut s.mc_duration, &self.mc_duration);
        self.stations.apply(cfg);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrialsArgs {
    /// Number of pairs.
    #[arg(short, long)]
    pub n: Option<u64>,
    /// Poisson emission rate instead of a fixed count, e.g. 1MHz.
    #[arg(long)]
    pub rate: Option<String>,
    /// Simulated run length, e.g. 1ms.
    #[arg(long)]
    pub duration: Option<String>,
    #[command(flatten)]
    pub stations: StationArgs,
}

impl TrialsArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.trials;
        set(&mut t.n, &self.n);
        set(&mut t.rate, &self.rate);
        set(&mut t.duration, &self.duration);
        self.stations.apply(cfg);
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A CSV, JSON-lines or SVG file written by this tool.
    pub file: PathBuf,
}
