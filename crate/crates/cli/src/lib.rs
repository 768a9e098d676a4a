//! Command-line front end for the `bellvt` simulator: configuration,
//! subcommands, CSV / JSON-lines / SVG output and provenance replay.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod units;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bellvt::montecarlo::McOptions;

use args::{Cli, Command};
use config::{Format, RunConfig};
use error::CliError;
use output::{read_provenance, Provenance};

pub use commands::{execute, CommandOutput};

/// Runs a parsed command line and writes its outputs.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (command, mut cfg) = match &cli.command {
        Command::Replay(r) => {
            let text = std::fs::read_to_string(&r.file).map_err(|e| CliError::io(&r.file, e))?;
            let prov = read_provenance(&text)?;
            (prov.command, prov.config)
        }
        other => {
            let mut cfg = match &cli.global.config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            other.apply(&mut cfg);
            (other.name().to_string(), cfg)
        }
    };
    if let Some(seed) = cli.global.seed {
        cfg.seed = Some(seed);
    }
    if let Some(format) = cli.global.format {
        cfg.format = Some(format);
    }
    if cli.global.threads == Some(0) {
        return Err(CliError::Validation("--threads must be at least 1".into()));
    }
    let opts = McOptions {
        workers: cli.global.threads,
    };
    let out = execute(&command, &mut cfg, &opts)?;
    let format = cfg.format.expect("execute resolves the format");
    let prov = Provenance::new(&command, cfg);
    let plot_svg = || -> Result<String, CliError> {
        out.plot
            .as_ref()
            .map(|p| p.to_svg(&prov))
            .ok_or_else(|| CliError::Validation(format!("{command} has no plot output")))
    };
    if let Some(path) = &cli.global.plot {
        let svg = plot_svg()?;
        write_to(Some(path), |w| w.write_all(svg.as_bytes()).map_err(|e| CliError::io(path, e)))?;
    }
    let out_path = cli.global.output.as_deref();
    match format {
        Format::Csv => write_to(out_path, |w| out.table.write_csv(&prov, w)),
        Format::JsonLines => write_to(out_path, |w| out.table.write_json_lines(&prov, w)),
        Format::SvgPlot => {
            let svg = plot_svg()?;
            write_to(out_path, |w| w.write_all(svg.as_bytes()).map_err(|e| CliError::Io(e.to_string())))
        }
    }
}

fn write_to(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| match e {
                CliError::Io(m) => CliError::Io(format!("{}: {m}", p.display())),
                other => other,
            })?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}
