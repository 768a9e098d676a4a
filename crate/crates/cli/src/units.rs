//! Parsing of dimensioned quantities. Angles and times need an explicit
//! unit; frequencies default to Hz so that plain "48400000" and "48.4e6"
//! work as well as "48.4MHz".

use std::f64::consts::PI;

use bellvt::models::PolAngle;

use crate::error::CliError;

fn split_unit(s: &str) -> (&str, &str) {
    let s = s.trim();
    let idx = s
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic() && !((c == 'e' || c == 'E') && is_exponent(s, i)) || c == '°' || c == 'µ'
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    (s[..idx].trim(), s[idx..].trim())
}

// an 'e' followed by a digit or sign and preceded by a digit is an exponent
fn is_exponent(s: &str, i: usize) -> bool {
    let before = s[..i].chars().last().is_some_and(|c| c.is_ascii_digit() || c == '.');
    let after = s[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+');
    before && after
}

fn number(s: &str, what: &str, input: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse {what} {input:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{what} must be finite, got {input:?}")))
    }
}

/// Angle in radians from e.g. "22.5deg", "0.3927rad", "45°".
pub fn parse_angle_radians(input: &str) -> Result<f64, CliError> {
    let (num, unit) = split_unit(input);
    let v = number(num, "angle", input)?;
    match unit {
        "deg" | "°" | "degree" | "degrees" => Ok(v * PI / 180.0),
        "rad" | "radian" | "radians" => Ok(v),
        "" => Err(CliError::Validation(format!(
            "angle {input:?} needs a unit (deg or rad)"
        ))),
        other => Err(CliError::Validation(format!("unknown angle unit {other:?} in {input:?}"))),
    }
}

pub fn parse_angle(input: &str) -> Result<PolAngle, CliError> {
    Ok(PolAngle::new(parse_angle_radians(input)?)?)
}

/// Frequency in Hz from "46.2MHz", "48.4e6" or "48400000".
pub fn parse_frequency(input: &str) -> Result<f64, CliError> {
    let (num, unit) = split_unit(input);
    let v = number(num, "frequency", input)?;
    let scale = match unit {
        "" | "Hz" | "hz" => 1.0,
        "kHz" | "khz" => 1e3,
        "MHz" | "mhz" => 1e6,
        "GHz" | "ghz" => 1e9,
        other => return Err(CliError::Validation(format!("unknown frequency unit {other:?} in {input:?}"))),
    };
    Ok(v * scale)
}

/// Time in seconds from "43ns", "1ms", "2.5us", "0.001s".
pub fn parse_time(input: &str) -> Result<f64, CliError> {
    let (num, unit) = split_unit(input);
    let v = number(num, "time", input)?;
    let scale = match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        "" => return Err(CliError::Validation(format!("time {input:?} needs a unit (s, ms, us, ns, ps)"))),
        other => return Err(CliError::Validation(format!("unknown time unit {other:?} in {input:?}"))),
    };
    Ok(v * scale)
}

/// Lossless canonical spellings used in provenance headers.
pub fn fmt_radians(v: f64) -> String {
    format!("{v}rad")
}

pub fn fmt_hz(v: f64) -> String {
    format!("{v}Hz")
}

pub fn fmt_seconds(v: f64) -> String {
    format!("{v}s")
}
