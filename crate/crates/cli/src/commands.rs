//! Subcommand implementations. Each reads its parameters from a
//! [`RunConfig`], writes back the canonical values it used, and returns a
//! table plus, where it makes sense, a plot.

use std::f64::consts::PI;

use bellvt::choice::{
    chsh_coincidences, corr_fc, corr_fc_mixture, mix_fractions, n_fc_mixture, n_single, s_chsh_fc, s_chsh_fc_mixture,
    s_chsh_fixed, s_prime, s_prime_fc_mixture, s_prime_model, ChoiceQuad, CoincidenceModel, StationConfig,
    Switching, SyncFractions, IDEAL_SINGLES,
};
use bellvt::models::{corr, ModelKind};
use bellvt::montecarlo::{
    experiment_tally, run_timeline, EmissionSchedule, EstimateWithError, McOptions, RngSpec, TimelineConfig,
};
use bellvt::sweep::{aspect_point, run_sweep, SweepSpec, SweepVariable, DEFAULT_SWEEP_POINTS};

use crate::config::{Engine, Format, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::plot::{Plot, RefLine, Series};
use crate::units::{fmt_radians, fmt_seconds, parse_angle_radians, parse_frequency, parse_time, fmt_hz};

pub struct CommandOutput {
    pub table: Table,
    pub plot: Option<Plot>,
}

impl CommandOutput {
    fn table(table: Table) -> Self {
        CommandOutput { table, plot: None }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn default_format(command: &str) -> Format {
    match command {
        "export-trials" => Format::JsonLines,
        _ => Format::Csv,
    }
}

/// Runs `command` against `cfg`, filling `cfg` with the resolved values.
pub fn execute(command: &str, cfg: &mut RunConfig, opts: &McOptions) -> Result<CommandOutput, CliError> {
    cfg.format.get_or_insert(default_format(command));
    match command {
        "curves" => curves(cfg),
        "bell" => bell(cfg, opts),
        "sweep" => sweep(cfg, opts),
        "sync" => sync(cfg),
        "aspect" => Ok(aspect()),
        "export-trials" => export_trials(cfg, opts),
        other => Err(invalid(format!("unknown command {other:?}"))),
    }
}

fn key_value(rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    for &(k, v) in rows {
        t.push(vec![k.into(), v.into()]);
    }
    t
}

fn curves(cfg: &mut RunConfig) -> Result<CommandOutput, CliError> {
    let c = &mut cfg.curves;
    let names = c
        .models
        .get_or_insert_with(|| ModelKind::ALL.iter().map(|m| m.short_name().to_string()).collect());
    if names.is_empty() {
        return Err(invalid("no models selected"));
    }
    let models = names
        .iter()
        .map(|n| n.parse::<ModelKind>().map_err(|e| invalid(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    *names = models.iter().map(|m| m.short_name().to_string()).collect();
    let start = parse_angle_radians(c.start.get_or_insert_with(|| "0deg".into()))?;
    let stop = parse_angle_radians(c.stop.get_or_insert_with(|| "180deg".into()))?;
    c.start = Some(fmt_radians(start));
    c.stop = Some(fmt_radians(stop));
    let points = *c.points.get_or_insert(181);
    if points < 2 || start >= stop {
        return Err(invalid("curves need start < stop and at least 2 points"));
    }

    let mut columns = vec!["delta_rad", "delta_deg"];
    columns.extend(models.iter().map(|m| m.short_name()));
    let mut table = Table::new(&columns);
    let mut series: Vec<Series> = models
        .iter()
        .map(|m| Series {
            name: m.short_name().into(),
            color: model_color(*m),
            points: Vec::with_capacity(points),
        })
        .collect();
    for k in 0..points {
        let delta = if k + 1 == points {
            stop
        } else {
            start + (stop - start) * k as f64 / (points - 1) as f64
        };
        // correlations depend on a − b only; fold a = Δ, b = 0
        let a = bellvt::models::PolAngle::new(delta)?;
        let b = bellvt::models::PolAngle::ZERO;
        let mut row = vec![Cell::Num(delta), Cell::Num(delta * 180.0 / PI)];
        for (m, s) in models.iter().zip(series.iter_mut()) {
            let e = corr(*m, a, b);
            row.push(e.into());
            s.points.push((delta * 180.0 / PI, e));
        }
        table.push(row);
    }
    let plot = Plot {
        title: "Correlation versus setting difference".into(),
        x_label: "a − b (degrees)".into(),
        y_label: "E(a, b)".into(),
        series,
        reference_lines: Vec::new(),
        shaded: None,
    };
    Ok(CommandOutput { table, plot: Some(plot) })
}

fn model_color(m: ModelKind) -> &'static str {
    match m {
        ModelKind::QuantumMechanical => "green",
        ModelKind::SemiClassical => "purple",
        ModelKind::MaxClassicalLHV => "orange",
        ModelKind::VacuumTexture => "blue",
    }
}

fn sync(cfg: &mut RunConfig) -> Result<CommandOutput, CliError> {
    let (alice, bob, _) = cfg.resolve_stations()?;
    let sf = SyncFractions::from_stations(&alice, &bob);
    Ok(CommandOutput::table(key_value(&[
        ("nu_alice_hz", alice.switch_frequency),
        ("nu_bob_hz", bob.switch_frequency),
        ("round_trip_alice_s", alice.round_trip_time),
        ("round_trip_bob_s", bob.round_trip_time),
        ("f_a", sf.f_a),
        ("f_b", sf.f_b),
        ("f", sf.f),
        ("f_prime", sf.f_prime),
    ])))
}

pub fn aspect() -> CommandOutput {
    let r = aspect_point();
    let (c, q) = (r.computed, r.quoted);
    CommandOutput::table(key_value(&[
        ("round_trip_s", r.round_trip_time),
        ("nu_alice_hz", r.nu_alice),
        ("nu_bob_hz", r.nu_bob),
        ("f_a", c.fractions.f_a),
        ("f_b", c.fractions.f_b),
        ("f", c.fractions.f),
        ("f_prime", c.fractions.f_prime),
        ("s_prime", c.s_prime),
        ("s_chsh", c.s_chsh),
        ("quoted_f_a", q.fractions.f_a),
        ("quoted_f_b", q.fractions.f_b),
        ("quoted_f", q.fractions.f),
        ("quoted_f_prime", q.fractions.f_prime),
        ("quoted_s_prime", q.s_prime),
        ("quoted_s_chsh", q.s_chsh),
        ("measured_s_prime", r.measured_s_prime),
        ("measured_s_prime_error", r.measured_s_prime_error),
        ("discrepancy", r.discrepancy()),
        ("discrepancy_sigmas", r.discrepancy() / r.measured_s_prime_error),
    ]))
}

#[derive(Clone, Copy, PartialEq)]
enum Form {
    Chsh,
    Prime,
}

/// Station schedule whose in-sync fraction is `f`: the lowest square-wave
/// frequency giving it.
fn station_for_fraction(mut s: StationConfig, f: f64) -> StationConfig {
    s.switching = Switching::Periodic;
    s.switch_frequency = (1.0 - f) / (2.0 * s.round_trip_time);
    s
}

fn bell(cfg: &mut RunConfig, opts: &McOptions) -> Result<CommandOutput, CliError> {
    let seed = cfg.resolve_seed();
    let (mut alice, mut bob, weights) = cfg.resolve_stations()?;
    let b = &mut cfg.bell;
    let form = match b.form.get_or_insert_with(|| "s-prime".into()).as_str() {
        "s" => Form::Chsh,
        "s-prime" => Form::Prime,
        other => return Err(invalid(format!("form must be s or s-prime, got {other:?}"))),
    };
    let model = match b.model.get_or_insert_with(|| "fc".into()).as_str() {
        "fc" => None,
        other => Some(other.parse::<ModelKind>().map_err(|e| invalid(e.to_string()))?),
    };
    let engine = *b.engine.get_or_insert(Engine::ClosedForm);
    let quad = ChoiceQuad::new(alice.setting_1, bob.setting_1, alice.setting_2, bob.setting_2);
    if quad.a == quad.a_alt || quad.b == quad.b_alt {
        return Err(invalid("each station needs two distinct settings"));
    }

    let (f_a, f_b) = match (b.f, b.f_a, b.f_b) {
        (Some(f), _, _) => (Some(f), Some(f)),
        (None, fa, fb) => (fa, fb),
    };
    if let Some(f) = f_a {
        alice = station_for_fraction(alice, f);
    }
    if let Some(f) = f_b {
        bob = station_for_fraction(bob, f);
    }
    let sf = mix_fractions(f_a.unwrap_or(alice.sync_fraction()), f_b.unwrap_or(bob.sync_fraction()))?;

    let mut table = Table::new(&["quantity", "engine", "value", "std_error"]);
    let row = |t: &mut Table, k: &str, engine: &str, v: f64, err: Option<f64>| {
        t.push(vec![k.into(), engine.into(), v.into(), err.into()]);
    };
    let term_names = match form {
        Form::Chsh => ["e_ab", "e_ab_alt", "e_a_alt_b", "e_a_alt_b_alt"],
        Form::Prime => ["n_ab", "n_ab_alt", "n_a_alt_b", "n_a_alt_b_alt"],
    };

    if engine.closed_form() {
        const CF: &str = "closed-form";
        if model.is_none() {
            for (k, v) in [("f_a", sf.f_a), ("f_b", sf.f_b), ("f", sf.f), ("f_prime", sf.f_prime)] {
                row(&mut table, k, CF, v, None);
            }
        }
        let terms = quad.chsh_terms();
        match form {
            Form::Chsh => {
                for (name, (_, term)) in term_names.iter().zip(&terms) {
                    let e = match model {
                        Some(m) => corr(m, term.a, term.b),
                        None if weights.is_equal() => corr_fc(term, &sf),
                        None => corr_fc_mixture(term, &sf, weights)?,
                    };
                    row(&mut table, name, CF, e, None);
                }
                let s = match model {
                    Some(m) => s_chsh_fixed(m, &quad),
                    None if weights.is_equal() => s_chsh_fc(&quad, &sf),
                    None => s_chsh_fc_mixture(&quad, &sf, weights)?,
                };
                row(&mut table, "s", CF, s, None);
            }
            Form::Prime => {
                let (n, singles, sp) = match model {
                    Some(m) => {
                        let cm = CoincidenceModel::Fixed(m);
                        let n = chsh_coincidences(cm, &quad);
                        let s1 = n_single(cm, &quad);
                        (n, [s1, s1], s_prime_model(cm, &quad)?)
                    }
                    None => {
                        let mut n = [0.0; 4];
                        for (slot, (_, term)) in n.iter_mut().zip(&terms) {
                            *slot = n_fc_mixture(term, &sf, weights)?;
                        }
                        let sp = if weights.is_equal() {
                            s_prime(&n, &[IDEAL_SINGLES, IDEAL_SINGLES])?
                        } else {
                            s_prime_fc_mixture(&quad, &sf, weights)?
                        };
                        (n, [IDEAL_SINGLES, IDEAL_SINGLES], sp)
                    }
                };
                for (name, v) in term_names.iter().zip(n) {
                    row(&mut table, name, CF, v, None);
                }
                row(&mut table, "single_a_alt", CF, singles[0], None);
                row(&mut table, "single_b", CF, singles[1], None);
                row(&mut table, "s_prime", CF, sp, None);
            }
        }
    }

    if engine.monte_carlo() {
        const MC: &str = "monte-carlo";
        if model.is_some() {
            return Err(invalid("the monte-carlo engine simulates the fc model only"));
        }
        let pairs = *b.pairs.get_or_insert(4_000_000);
        let duration = parse_time(b.duration.get_or_insert_with(|| "1ms".into()))?;
        b.duration = Some(fmt_seconds(duration));
        let mut tcfg = TimelineConfig::uniform(alice, bob, duration, pairs);
        tcfg.weights = weights;
        let tally = experiment_tally(&tcfg, RngSpec::new(seed, 0), opts)?;
        let (fa, fb) = tally.sync_fractions()?;
        row(&mut table, "f_a", MC, fa.value, Some(fa.std_error));
        row(&mut table, "f_b", MC, fb.value, Some(fb.std_error));
        let est = |t: &mut Table, k: &str, e: EstimateWithError| row(t, k, MC, e.value, Some(e.std_error));
        for (k, name) in term_names.iter().enumerate() {
            let (i, j) = (k / 2, k % 2);
            let e = match form {
                Form::Chsh => tally.correlation(i, j)?,
                Form::Prime => tally.coincidence(i, j)?,
            };
            est(&mut table, name, e);
        }
        match form {
            Form::Chsh => est(&mut table, "s", tally.s_chsh()?),
            Form::Prime => {
                let singles = experiment_tally(&tcfg, RngSpec::new(seed, 1), opts)?;
                est(&mut table, "single_a_alt", singles.alice_single(1)?);
                est(&mut table, "single_b", singles.bob_single(0)?);
                est(&mut table, "s_prime", tally.s_prime(&singles)?);
            }
        }
    }
    Ok(CommandOutput::table(table))
}

fn parse_variable(s: &str) -> Result<SweepVariable, CliError> {
    Ok(match s {
        "frequency-common" => SweepVariable::FrequencyCommon,
        "frequency-alice-only" => SweepVariable::FrequencyAliceOnly,
        "f-direct" => SweepVariable::FDirect,
        "distance-ratio" => SweepVariable::DistanceRatio,
        other => return Err(invalid(format!("unknown sweep variable {other:?}"))),
    })
}

fn parse_fraction(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(format!("expected a plain number, got {s:?}")))
}

fn sweep(cfg: &mut RunConfig, opts: &McOptions) -> Result<CommandOutput, CliError> {
    let seed = cfg.resolve_seed();
    let (alice, bob, weights) = cfg.resolve_stations()?;
    let distance_ratio = 1.0 - weights.alice;
    let s = &mut cfg.sweep;
    let variable = parse_variable(s.variable.get_or_insert_with(|| "frequency-common".into()))?;
    let fraction = variable == SweepVariable::FDirect;
    let (start, stop, points) = if fraction {
        let start = parse_fraction(s.start.get_or_insert_with(|| "0".into()))?;
        let stop = parse_fraction(s.stop.get_or_insert_with(|| "1".into()))?;
        s.start = Some(start.to_string());
        s.stop = Some(stop.to_string());
        (start, stop, *s.points.get_or_insert(101))
    } else {
        let start = parse_frequency(s.start.get_or_insert_with(|| "0Hz".into()))?;
        let stop = parse_frequency(s.stop.get_or_insert_with(|| "100MHz".into()))?;
        s.start = Some(fmt_hz(start));
        s.stop = Some(fmt_hz(stop));
        (start, stop, *s.points.get_or_insert(DEFAULT_SWEEP_POINTS))
    };
    let engine = *s.engine.get_or_insert(Engine::ClosedForm);
    let monte_carlo = engine.monte_carlo();
    let (mc_pairs, mc_duration) = if monte_carlo {
        let pairs = *s.mc_pairs.get_or_insert(100_000);
        let d = parse_time(s.mc_duration.get_or_insert_with(|| "1ms".into()))?;
        s.mc_duration = Some(fmt_seconds(d));
        (pairs, d)
    } else {
        (0, 1e-3)
    };
    let spec = SweepSpec {
        variable,
        start,
        stop,
        points,
        alice,
        bob,
        distance_ratio,
        monte_carlo,
        mc_pairs_per_point: mc_pairs,
        mc_duration,
        rng: RngSpec::new(seed, 0),
    };
    let series = run_sweep(&spec, opts)?;

    let mut columns = vec!["x", "f_a", "f_b", "s_prime", "s_chsh"];
    if monte_carlo {
        columns.extend(["mc_s_prime", "mc_s_prime_std_error", "mc_s_chsh", "mc_s_chsh_std_error"]);
    }
    let mut table = Table::new(&columns);
    let scale = if fraction { 1.0 } else { 1e-6 };
    let mut closed = Vec::with_capacity(points);
    let mut mc = Vec::new();
    for p in &series.points {
        let mut row: Vec<Cell> = vec![p.x.into(), p.f_a.into(), p.f_b.into(), p.s_prime.into(), p.s_chsh.into()];
        closed.push((p.x * scale, p.s_prime));
        if monte_carlo {
            let (sp, sc) = (p.mc_s_prime.expect("mc run"), p.mc_s_chsh.expect("mc run"));
            row.extend([sp.value.into(), sp.std_error.into(), sc.value.into(), sc.std_error.into()]);
            mc.push((p.x * scale, sp.value));
        }
        table.push(row);
    }
    let refs = series.reference_lines;
    let mut plot_series = vec![Series {
        name: "s_prime".into(),
        color: "red",
        points: closed,
    }];
    if monte_carlo {
        plot_series.push(Series {
            name: "mc_s_prime".into(),
            color: "black",
            points: mc,
        });
    }
    let plot = Plot {
        title: "Expected S′ with vacuum texture".into(),
        x_label: match variable {
            SweepVariable::FDirect => "in-sync fraction f".into(),
            SweepVariable::DistanceRatio => "Bob's switching frequency (MHz)".into(),
            _ => "switching frequency (MHz)".into(),
        },
        y_label: "S′".into(),
        series: plot_series,
        reference_lines: vec![
            RefLine {
                name: "quantum".into(),
                color: "green",
                y: refs.quantum_s_prime,
            },
            RefLine {
                name: "semi-classical".into(),
                color: "purple",
                y: refs.semi_classical_s_prime,
            },
        ],
        shaded: Some(refs.lhv_s_prime),
    };
    Ok(CommandOutput { table, plot: Some(plot) })
}

fn export_trials(cfg: &mut RunConfig, opts: &McOptions) -> Result<CommandOutput, CliError> {
    let seed = cfg.resolve_seed();
    let (alice, bob, weights) = cfg.resolve_stations()?;
    let t = &mut cfg.trials;
    let duration = parse_time(t.duration.get_or_insert_with(|| "1ms".into()))?;
    t.duration = Some(fmt_seconds(duration));
    let schedule = match &t.rate {
        Some(r) => {
            let rate = parse_frequency(r)?;
            t.rate = Some(fmt_hz(rate));
            t.n = None;
            EmissionSchedule::Poisson { rate }
        }
        None => EmissionSchedule::Uniform {
            n_pairs: *t.n.get_or_insert(1000),
        },
    };
    let tcfg = TimelineConfig {
        alice,
        bob,
        weights,
        duration,
        schedule,
    };
    let records = run_timeline(&tcfg, RngSpec::new(seed, 0), opts)?;
    let mut table = Table::new(&["lambda", "a_v", "b_v", "a_m", "b_m", "alpha", "beta", "emission_time"]);
    table.rows.reserve(records.len());
    for r in &records {
        table.push(vec![
            r.lambda.radians().into(),
            r.a_v.radians().into(),
            r.b_v.radians().into(),
            r.a_m.radians().into(),
            r.b_m.radians().into(),
            Cell::Int(r.alpha.into()),
            Cell::Int(r.beta.into()),
            r.emission_time.into(),
        ]);
    }
    Ok(CommandOutput::table(table))
}
