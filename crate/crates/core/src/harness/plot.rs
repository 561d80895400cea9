use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::output::{read_csv, ResultRow};
use crate::baselines::write_atomic;
use crate::{Error, Result};

/// Axis labelling for [`render_svg`]; the drawing itself is the same for all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Auto,
    Belief,
    Credibility,
    Calibration,
    Power,
    Size,
}

impl PlotKind {
    fn labels(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::Auto => ("param1", "estimate"),
            PlotKind::Belief => ("θ", "belief / plausibility"),
            PlotKind::Credibility => ("ω", "φ̂"),
            PlotKind::Calibration => ("α", "estimate"),
            PlotKind::Power => ("alternative", "power"),
            PlotKind::Size => ("n", "rejection rate"),
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "auto" => PlotKind::Auto,
            "belief" => PlotKind::Belief,
            "credibility" => PlotKind::Credibility,
            "calibration" | "calibrate" => PlotKind::Calibration,
            "power" => PlotKind::Power,
            "size" => PlotKind::Size,
            other => return Err(format!("unknown plot kind `{other}`")),
        })
    }
}

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Series {
    label: String,
    points: Vec<(f64, f64, f64)>,
}

// one series per (test, param2), in order of first appearance
fn series(rows: &[ResultRow], kind: PlotKind) -> Vec<Series> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    for r in rows {
        let k = (r.test.clone(), r.param2.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let multi = |test: &str| keys.iter().filter(|(t, _)| t == test).count() > 1;
    let second = if kind == PlotKind::Belief { "ω" } else { "α" };
    keys.iter()
        .map(|(test, p2)| {
            let p2 = f64::from_bits(*p2);
            let mut points: Vec<_> = rows
                .iter()
                .filter(|r| &r.test == test && r.param2 == p2)
                .map(|r| (r.param1, r.estimate, r.se))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = if multi(test) { format!("{test}, {second}={p2}") } else { test.clone() };
            Series { label, points }
        })
        .collect()
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Standalone SVG 1.1 line chart of a result table: one polyline per
/// `(test, param2)` and a shaded ±2·se band wherever `se > 0`.
pub fn render_svg(rows: &[ResultRow], kind: PlotKind, title: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::domain("result table has no rows to plot"));
    }
    let all = series(rows, kind);
    let (x0, x1) = range(rows.iter().map(|r| r.param1));
    let probs = rows.iter().all(|r| (0.0..=1.0).contains(&r.estimate));
    let (y0, y1) = if probs {
        (0.0, 1.0)
    } else {
        let (lo, hi) = range(rows.iter().flat_map(|r| [r.estimate - 2.0 * r.se, r.estimate + 2.0 * r.se]));
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y.clamp(y0, y1) - y0) / (y1 - y0)) * ph;
    let (xlabel, ylabel) = kind.labels();

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(title));
    let _ = writeln!(s, r#"<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>"#);
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="#ccc"/>"##, TOP, TOP + ph);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ccc"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        esc(ylabel)
    );
    for (k, ser) in all.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if ser.points.iter().any(|p| p.2 > 0.0) {
            let upper = ser.points.iter().map(|&(x, y, se)| (x, y + 2.0 * se));
            let lower = ser.points.iter().rev().map(|&(x, y, se)| (x, y - 2.0 * se));
            let pts: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, pts.join(" "));
        }
        let pts: Vec<String> = ser.points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, esc(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Render the CSV at `csv` into `svg`. Nothing is written on error.
pub fn plot(csv: &Path, kind: PlotKind, svg: &Path) -> Result<()> {
    let rows = read_csv(csv)?;
    let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let text = render_svg(&rows, kind, &title)?;
    write_atomic(svg, text.as_bytes())
}
