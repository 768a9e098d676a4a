//! Deterministic static SVG line plots. The plotted data is embedded as
//! `data-*` attributes so tests can check geometry without rasterizing.

use std::fmt::Write as _;

use crate::output::{fmt_num, Provenance};

pub const METADATA_OPEN: &str = "<metadata id=\"provenance\">";

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefLine {
    pub name: String,
    pub color: &'static str,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub reference_lines: Vec<RefLine>,
    /// Horizontal band (y_low, y_high) shaded as the LHV-allowed region.
    pub shaded: Option<(f64, f64)>,
}

pub fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn xml_unescape(s: &str) -> String {
    s.replace("&quot;", "\"").replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
}

fn num(v: f64) -> String {
    fmt_num(v).unwrap_or_else(|| "NaN".into())
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl Plot {
    fn x_range(&self) -> (f64, f64) {
        bounds(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))
    }

    fn y_range(&self) -> (f64, f64) {
        let (lo, hi) = bounds(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1))
                .chain(self.reference_lines.iter().map(|r| r.y)),
        );
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }

    pub fn to_svg(&self, prov: &Provenance) -> String {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-x-min="{}" data-x-max="{}" data-y-min="{}" data-y-max="{}">"#,
            num(x0),
            num(x1),
            num(y0),
            num(y1)
        );
        let _ = writeln!(s, "{METADATA_OPEN}{}</metadata>", xml_escape(&prov.to_json()));
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        if let Some((lo, hi)) = self.shaded {
            let top = py(hi.min(y1)).max(TOP);
            let bottom = py(lo.max(y0)).min(TOP + ph);
            if bottom > top {
                let _ = writeln!(
                    s,
                    r##"<rect class="lhv-region" x="{LEFT:.2}" y="{top:.2}" width="{pw:.2}" height="{:.2}" fill="#dddddd" data-y-low="{}" data-y-high="{}"/>"##,
                    bottom - top,
                    num(lo),
                    num(hi)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        for k in 0..=TICKS {
            let fx = x0 + (x1 - x0) * k as f64 / TICKS as f64;
            let fy = y0 + (y1 - y0) * k as f64 / TICKS as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                px(fx),
                TOP + ph + 16.0,
                format_tick(fx)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                py(fy) + 4.0,
                format_tick(fy)
            );
        }
        for r in &self.reference_lines {
            let _ = writeln!(
                s,
                r#"<line class="reference" data-name="{}" data-y="{}" x1="{LEFT:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="4 3"/>"#,
                xml_escape(&r.name),
                num(r.y),
                LEFT + pw,
                py(r.y),
                py(r.y),
                r.color
            );
        }
        for series in &self.series {
            let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let data: Vec<String> = series.points.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" data-name="{}" data-points="{}" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                xml_escape(&series.name),
                data.join(" "),
                pts.join(" "),
                series.color
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            xml_escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 10.0,
            xml_escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            xml_escape(&self.y_label)
        );
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 { "0".into() } else { format!("{r}") }
}

/// Series named `name` parsed back from the `data-points` attribute.
pub fn series_from_svg(svg: &str, name: &str) -> Option<Vec<(f64, f64)>> {
    let tag = format!("data-name=\"{}\" data-points=\"", xml_escape(name));
    let start = svg.find(&tag)? + tag.len();
    let end = start + svg[start..].find('"')?;
    svg[start..end]
        .split(' ')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (x, y) = p.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}
