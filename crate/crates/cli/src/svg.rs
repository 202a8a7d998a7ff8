//! Minimal deterministic SVG line charts.

use std::fmt::Write;

use anyhow::{bail, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 10;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
}

impl Axis {
    fn new(scale: Scale, values: impl Iterator<Item = f64>) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            bail!("no plottable values");
        }
        match scale {
            Scale::Log => {
                let mut a = lo.log10().floor() as i32;
                let mut b = hi.log10().ceil() as i32;
                if a == b {
                    a -= 1;
                    b += 1;
                }
                let stride = ((b - a) as usize).div_ceil(TICKS).max(1) as i32;
                let ticks = (a..=b)
                    .filter(|e| (e - a) % stride == 0)
                    .map(|e| 10f64.powi(e))
                    .collect();
                Ok(Self {
                    scale,
                    lo: a as f64,
                    hi: b as f64,
                    ticks,
                })
            }
            Scale::Linear => {
                if lo == hi {
                    lo -= 0.5;
                    hi += 0.5;
                }
                let step = (hi - lo) / TICKS as f64;
                let ticks = (0..=TICKS).map(|i| lo + step * i as f64).collect();
                Ok(Self {
                    scale,
                    lo,
                    hi,
                    ticks,
                })
            }
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = match self.scale {
            Scale::Log => v.log10(),
            Scale::Linear => v,
        };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, v: f64) -> String {
        match self.scale {
            Scale::Log => format!("1e{}", v.log10().round() as i32),
            Scale::Linear => format_linear(v),
        }
    }
}

fn format_linear(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    }
}

fn usable(scale: Scale, v: f64) -> bool {
    v.is_finite() && (scale == Scale::Linear || v > 0.0)
}

/// Keeps at most `MAX_POINTS` evenly strided points, always including the last.
fn thin(n: usize) -> Vec<usize> {
    if n <= MAX_POINTS {
        return (0..n).collect();
    }
    let stride = n.div_ceil(MAX_POINTS);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

pub fn render(chart: &Chart) -> Result<String> {
    if chart.series.is_empty() {
        bail!("nothing to plot");
    }
    let points = |pick: fn(&Series) -> &Vec<f64>, scale: Scale| {
        chart
            .series
            .iter()
            .flat_map(move |s| pick(s).iter().copied())
            .filter(move |&v| usable(scale, v))
    };
    let x = Axis::new(chart.x_scale, points(|s| &s.xs, chart.x_scale))?;
    let y = Axis::new(chart.y_scale, points(|s| &s.ys, chart.y_scale))?;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + x.unit(v) * pw;
    let py = |v: f64| TOP + (1.0 - y.unit(v)) * ph;

    let mut out = String::new();
    writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&chart.title)
    )?;

    // Grid and tick labels.
    for &t in &x.ticks {
        let xx = px(t);
        writeln!(
            out,
            r##"<line x1="{xx:.2}" y1="{TOP:.2}" x2="{xx:.2}" y2="{:.2}" stroke="#e0e0e0"/>
<text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            escape(&x.label(t))
        )?;
    }
    for &t in &y.ticks {
        let yy = py(t);
        writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#e0e0e0"/>
<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            yy + 4.0,
            escape(&y.label(t))
        )?;
    }
    writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>
<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>
<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 20.0,
        escape(&chart.x_label),
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&chart.y_label)
    )?;

    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut coords = String::new();
        for j in thin(s.xs.len().min(s.ys.len())) {
            let (a, b) = (s.xs[j], s.ys[j]);
            if usable(chart.x_scale, a) && usable(chart.y_scale, b) {
                if !coords.is_empty() {
                    coords.push(' ');
                }
                write!(coords, "{:.2},{:.2}", px(a), py(b))?;
            }
        }
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>"#
        )?;
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 15.0;
        writeln!(
            out,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        )?;
    }
    out.push_str("</svg>\n");
    Ok(out)
}
