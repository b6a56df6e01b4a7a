//! Minimal SVG charts drawn from result tables.
//!
//! A [`PlotSpec`] names CSV files and columns only, so every chart can be
//! redrawn from the CSV files alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::table::Table;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    /// Polyline through the rows in file order.
    Line,
    /// One marker per row.
    Scatter,
    /// Colored tile per row, color from the `value` column.
    Heatmap,
}

/// A set of rows from one CSV file drawn in one style.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub csv: String,
    pub kind: LayerKind,
    pub x: String,
    pub y: String,
    /// Heatmap color column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// Rows are split into separate series by the distinct values of this column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Keep only rows whose `column` renders as `value`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<(String, String)>,
    pub label: String,
}

impl Layer {
    pub fn new(csv: &str, kind: LayerKind, x: &str, y: &str, label: &str) -> Self {
        Self {
            csv: csv.to_string(),
            kind,
            x: x.to_string(),
            y: y.to_string(),
            value: None,
            group: None,
            filter: None,
            label: label.to_string(),
        }
    }

    pub fn grouped(mut self, column: &str) -> Self {
        self.group = Some(column.to_string());
        self
    }

    pub fn filtered(mut self, column: &str, value: &str) -> Self {
        self.filter = Some((column.to_string(), value.to_string()));
        self
    }

    pub fn colored_by(mut self, column: &str) -> Self {
        self.value = Some(column.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub svg: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub layers: Vec<Layer>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series {
    label: String,
    kind: LayerKind,
    points: Vec<(f64, f64, f64)>,
}

fn missing(file: &str, column: &str) -> Error {
    Error::Table {
        file: file.to_string(),
        message: format!("no column `{column}`"),
    }
}

fn collect_series(layer: &Layer, table: &Table) -> Result<Vec<Series>> {
    let xs = table
        .numbers(&layer.x)
        .ok_or_else(|| missing(&layer.csv, &layer.x))?;
    let ys = table
        .numbers(&layer.y)
        .ok_or_else(|| missing(&layer.csv, &layer.y))?;
    let vs = match &layer.value {
        Some(v) => table.numbers(v).ok_or_else(|| missing(&layer.csv, v))?,
        None => vec![0.0; xs.len()],
    };
    let keep: Vec<bool> = match &layer.filter {
        Some((col, want)) => table
            .texts(col)
            .ok_or_else(|| missing(&layer.csv, col))?
            .iter()
            .map(|t| t == want)
            .collect(),
        None => vec![true; xs.len()],
    };
    let groups: Vec<String> = match &layer.group {
        Some(g) => table.texts(g).ok_or_else(|| missing(&layer.csv, g))?,
        None => vec![String::new(); xs.len()],
    };

    // Groups keep their first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut by_group: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for i in 0..xs.len() {
        if !keep[i] || !xs[i].is_finite() || !ys[i].is_finite() {
            continue;
        }
        let entry = by_group.entry(groups[i].clone()).or_insert_with(|| {
            order.push(groups[i].clone());
            Vec::new()
        });
        entry.push((xs[i], ys[i], vs[i]));
    }
    Ok(order
        .into_iter()
        .map(|g| {
            let label = if g.is_empty() {
                layer.label.clone()
            } else {
                format!("{} {g}", layer.label)
            };
            Series {
                label,
                kind: layer.kind,
                points: by_group.remove(&g).unwrap_or_default(),
            }
        })
        .collect())
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{:.3}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.03 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Blue-to-yellow ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = t * (STOPS.len() - 1) as f64;
    let k = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// Draws `spec`, reading each layer's table through `load`.
pub fn render_svg(spec: &PlotSpec, load: &mut dyn FnMut(&str) -> Result<Table>) -> Result<String> {
    let mut series = Vec::new();
    for layer in &spec.layers {
        let table = load(&layer.csv)?;
        series.extend(collect_series(layer, &table)?);
    }

    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = padded_range(all().map(|p| p.0));
    let (y0, y1) = padded_range(all().map(|p| p.1));
    let heat: Vec<f64> = series
        .iter()
        .filter(|s| s.kind == LayerKind::Heatmap)
        .flat_map(|s| s.points.iter().map(|p| p.2))
        .filter(|v| v.is_finite())
        .collect();
    let (v0, v1) = heat
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let w = &mut out;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&spec.title)
    )
    .unwrap();

    // Axes and ticks.
    writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for t in ticks(x0, x1) {
        let x = sx(t);
        writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(t)
        )
        .unwrap();
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        writeln!(
            w,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    )
    .unwrap();

    // Data, clipped to the plot area.
    writeln!(
        w,
        r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath><g clip-path="url(#plot)">"#
    )
    .unwrap();
    let mut legend = Vec::new();
    let mut color_index = 0;
    for s in &series {
        match s.kind {
            LayerKind::Heatmap => {
                let n = s.points.len().max(1) as f64;
                let side = (pw * ph / n).sqrt().max(2.0);
                for &(x, y, v) in &s.points {
                    let t = if v1 > v0 { (v - v0) / (v1 - v0) } else { 0.0 };
                    writeln!(
                        w,
                        r#"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="{}"/>"#,
                        sx(x) - side / 2.0,
                        sy(y) - side / 2.0,
                        ramp(t)
                    )
                    .unwrap();
                }
            }
            LayerKind::Line | LayerKind::Scatter => {
                let color = PALETTE[color_index % PALETTE.len()];
                color_index += 1;
                if s.kind == LayerKind::Line {
                    let pts: Vec<String> = s
                        .points
                        .iter()
                        .map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    writeln!(
                        w,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        pts.join(" ")
                    )
                    .unwrap();
                } else {
                    for &(x, y, _) in &s.points {
                        writeln!(
                            w,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{color}" fill-opacity="0.6"/>"#,
                            sx(x),
                            sy(y)
                        )
                        .unwrap();
                    }
                }
                legend.push((s.label.clone(), color));
            }
        }
    }
    writeln!(w, "</g>").unwrap();

    // Legend, or the color scale for heatmaps.
    let lx = WIDTH - RIGHT + 12.0;
    const MAX_LEGEND: usize = 20;
    for (k, (label, color)) in legend.iter().take(MAX_LEGEND).enumerate() {
        let y = TOP + 10.0 + 16.0 * k as f64;
        writeln!(
            w,
            r#"<rect x="{lx}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            y - 9.0,
            lx + 15.0,
            y,
            escape(label)
        )
        .unwrap();
    }
    if legend.len() > MAX_LEGEND {
        let y = TOP + 10.0 + 16.0 * MAX_LEGEND as f64;
        writeln!(
            w,
            r#"<text x="{lx}" y="{y:.2}">+{} more</text>"#,
            legend.len() - MAX_LEGEND
        )
        .unwrap();
    }
    if !heat.is_empty() {
        let steps = 20;
        let bar_h = ph * 0.6;
        for k in 0..steps {
            let t = 1.0 - k as f64 / (steps - 1) as f64;
            writeln!(
                w,
                r#"<rect x="{lx}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
                TOP + bar_h * k as f64 / steps as f64,
                bar_h / steps as f64 + 0.5,
                ramp(t)
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            TOP + 10.0,
            tick_label(v1),
            lx + 22.0,
            TOP + bar_h,
            tick_label(v0)
        )
        .unwrap();
    }
    writeln!(w, "</svg>").unwrap();
    Ok(out)
}
