//! Minimal static line charts.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug)]
pub enum SvgError {
    Empty,
    NonFinite { index: usize },
    NonPositiveOnLogAxis { index: usize },
    Io(std::io::Error),
}

impl std::fmt::Display for SvgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SvgError::Empty => write!(f, "cannot plot an empty series"),
            SvgError::NonFinite { index } => write!(f, "series point {index} is not finite"),
            SvgError::NonPositiveOnLogAxis { index } => {
                write!(f, "series point {index} is not positive on a logarithmic axis")
            }
            SvgError::Io(e) => write!(f, "cannot write chart: {e}"),
        }
    }
}

impl std::error::Error for SvgError {}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Axes<'a> {
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders `series` as one polyline. Output depends only on the inputs.
pub fn render_svg(series: &[(f64, f64)], axes: &Axes) -> Result<String, SvgError> {
    if series.is_empty() {
        return Err(SvgError::Empty);
    }
    let mut pts = Vec::with_capacity(series.len());
    for (index, &(x, y)) in series.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(SvgError::NonFinite { index });
        }
        if (axes.log_x && x <= 0.0) || (axes.log_y && y <= 0.0) {
            return Err(SvgError::NonPositiveOnLogAxis { index });
        }
        let tx = if axes.log_x { x.log10() } else { x };
        let ty = if axes.log_y { y.log10() } else { y };
        pts.push((tx, ty));
    }
    let (x0, x1) = range(pts.iter().map(|p| p.0));
    let (y0, y1) = range(pts.iter().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
    let tick = |v: f64, log: bool| {
        if log {
            format!("1e{v:.2}")
        } else {
            format!("{v:.4e}")
        }
    };

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    let font = r#"font-family="sans-serif" font-size="12""#;
    let base = TOP + ph;
    writeln!(out, r#"<text x="{LEFT}" y="{:.1}" {font}>{}</text>"#, base + 16.0, tick(x0, axes.log_x)).unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" {font} text-anchor="end">{}</text>"#,
        LEFT + pw,
        base + 16.0,
        tick(x1, axes.log_x)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{base:.1}" {font} text-anchor="end">{}</text>"#,
        LEFT - 4.0,
        tick(y0, axes.log_y)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" {font} text-anchor="end">{}</text>"#,
        LEFT - 4.0,
        TOP + 12.0,
        tick(y1, axes.log_y)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" {font} text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(axes.x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{:.1}" {font} text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(axes.y_label)
    )
    .unwrap();
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(series: &[(f64, f64)], axes: &Axes, path: &Path) -> Result<(), SvgError> {
    let svg = render_svg(series, axes)?;
    std::fs::write(path, svg).map_err(SvgError::Io)
}
