//! Tabular results and their CSV / JSON-lines encodings. Every file starts
//! with a provenance record holding the resolved configuration and seed;
//! floats are written with 17 significant digits so values round-trip.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const PROVENANCE_PREFIX: &str = "# provenance: ";
pub const TOOL_NAME: &str = "bellvt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Provenance {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

pub fn fmt_num(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v).unwrap_or_default(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v).unwrap_or_else(|| "null".into()),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
            Cell::Empty => "null".into(),
        }
    }

    /// Inverse of the CSV spelling: floats always carry an exponent.
    fn parse_csv(field: &str) -> Cell {
        if field.is_empty() {
            Cell::Empty
        } else if let Ok(i) = field.parse::<i64>() {
            Cell::Int(i)
        } else if field.contains(['e', 'E']) && field.parse::<f64>().is_ok() {
            Cell::Num(field.parse().expect("checked"))
        } else {
            Cell::Text(field.into())
        }
    }

    fn from_json(v: &serde_json::Value) -> Result<Cell, CliError> {
        Ok(match v {
            serde_json::Value::Null => Cell::Empty,
            serde_json::Value::String(s) => Cell::Text(s.clone()),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) if !n.to_string().contains(['e', 'E', '.']) => Cell::Int(i),
                _ => Cell::Num(n.as_f64().expect("json number")),
            },
            other => return Err(CliError::Validation(format!("unexpected JSON value {other}"))),
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell in the row whose first column reads `key` (key/value reports).
    pub fn lookup(&self, key: &str, column: &str) -> Option<&Cell> {
        let c = self.column(column)?;
        self.rows
            .iter()
            .find(|r| matches!(&r[0], Cell::Text(k) if k == key))
            .map(|r| &r[c])
    }

    pub fn write_csv<W: Write>(&self, prov: &Provenance, mut out: W) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        writeln!(out, "{PROVENANCE_PREFIX}{}", prov.to_json()).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field)).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    pub fn write_json_lines<W: Write>(&self, prov: &Provenance, mut out: W) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        writeln!(out, "{{\"provenance\":{}}}", prov.to_json()).map_err(io)?;
        let keys: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::to_string(c).expect("string serializes"))
            .collect();
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            line.push('{');
            for (i, (k, cell)) in keys.iter().zip(row).enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(k);
                line.push(':');
                line.push_str(&cell.json_value());
            }
            line.push('}');
            writeln!(out, "{line}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn read_csv(text: &str) -> Result<(Provenance, Table), CliError> {
    let (first, rest) = text.split_once('\n').ok_or_else(|| bad("empty CSV"))?;
    let prov = parse_provenance_json(first.strip_prefix(PROVENANCE_PREFIX).ok_or_else(|| bad("CSV has no provenance line"))?)?;
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let columns = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(rec.iter().map(Cell::parse_csv).collect());
    }
    Ok((prov, Table { columns, rows }))
}

pub fn read_json_lines(text: &str) -> Result<(Provenance, Table), CliError> {
    let mut lines = text.lines();
    let first: serde_json::Value =
        serde_json::from_str(lines.next().ok_or_else(|| bad("empty JSON-lines file"))?).map_err(|e| bad(e.to_string()))?;
    let prov: Provenance = serde_json::from_value(first.get("provenance").cloned().ok_or_else(|| bad("first line is not a provenance record"))?)
        .map_err(|e| bad(e.to_string()))?;
    let mut columns: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for line in lines {
        // keys are read in file order, so parse into an ordered list of pairs
        let pairs: Vec<(String, serde_json::Value)> = ordered_object(line)?;
        if columns.is_empty() {
            columns = pairs.iter().map(|(k, _)| k.clone()).collect();
        }
        rows.push(pairs.iter().map(|(_, v)| Cell::from_json(v)).collect::<Result<_, _>>()?);
    }
    Ok((prov, Table { columns, rows }))
}

fn ordered_object(line: &str) -> Result<Vec<(String, serde_json::Value)>, CliError> {
    struct Pairs(Vec<(String, serde_json::Value)>);
    impl<'de> Deserialize<'de> for Pairs {
        fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            struct V;
            impl<'de> serde::de::Visitor<'de> for V {
                type Value = Pairs;
                fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                    f.write_str("a JSON object")
                }
                fn visit_map<A: serde::de::MapAccess<'de>>(self, mut m: A) -> Result<Pairs, A::Error> {
                    let mut out = Vec::new();
                    while let Some(kv) = m.next_entry()? {
                        out.push(kv);
                    }
                    Ok(Pairs(out))
                }
            }
            d.deserialize_map(V)
        }
    }
    serde_json::from_str::<Pairs>(line)
        .map(|p| p.0)
        .map_err(|e| bad(e.to_string()))
}

fn parse_provenance_json(s: &str) -> Result<Provenance, CliError> {
    serde_json::from_str(s).map_err(|e| bad(format!("bad provenance record: {e}")))
}

/// Finds the provenance record in any file this tool writes.
pub fn read_provenance(text: &str) -> Result<Provenance, CliError> {
    if text.starts_with(PROVENANCE_PREFIX) {
        read_csv(text).map(|(p, _)| p)
    } else if text.starts_with('{') {
        let first = text.lines().next().unwrap_or_default();
        let v: serde_json::Value = serde_json::from_str(first).map_err(|e| bad(e.to_string()))?;
        serde_json::from_value(v.get("provenance").cloned().unwrap_or_default()).map_err(|e| bad(e.to_string()))
    } else if let Some(start) = text.find(crate::plot::METADATA_OPEN) {
        let body = &text[start + crate::plot::METADATA_OPEN.len()..];
        let end = body.find("</metadata>").ok_or_else(|| bad("unterminated SVG metadata"))?;
        parse_provenance_json(&crate::plot::xml_unescape(&body[..end]))
    } else {
        Err(bad("no provenance record found"))
    }
}
