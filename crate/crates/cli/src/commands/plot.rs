use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use crate::svg::{render, Chart, Scale, Series};
use crate::traces::{read_timing, read_trace, timing_path_for, TraceRows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    ResidualVsIter,
    ResidualVsTime,
    #[value(name = "trajectory_2d")]
    Trajectory2d,
}

impl PlotKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            PlotKind::ResidualVsIter => "residual_vs_iter",
            PlotKind::ResidualVsTime => "residual_vs_time",
            PlotKind::Trajectory2d => "trajectory_2d",
        }
    }
}

/// Legend label: the file stem without its `trace_` prefix.
fn label(path: &Path) -> String {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace");
    stem.strip_prefix("trace_").unwrap_or(stem).to_string()
}

pub fn chart(kind: PlotKind, traces: &[PathBuf]) -> Result<Chart> {
    if traces.is_empty() {
        bail!("plot needs at least one trace file");
    }
    let rows: Vec<TraceRows> = traces.iter().map(|p| read_trace(p)).collect::<Result<_>>()?;
    let mut series = Vec::new();
    let (title, x_label, y_label, x_scale, y_scale) = match kind {
        PlotKind::ResidualVsIter => {
            for (p, r) in traces.iter().zip(&rows) {
                series.push(Series {
                    label: label(p),
                    xs: r.k.clone(),
                    ys: r.residual.clone(),
                });
            }
            ("Iteration vs residual", "iteration k", "residual", Scale::Linear, Scale::Log)
        }
        PlotKind::ResidualVsTime => {
            for (p, r) in traces.iter().zip(&rows) {
                let times = read_timing(&timing_path_for(p))?;
                if times.len() != r.k.len() {
                    bail!(
                        "{}: timing sidecar has {} rows, trace has {}",
                        p.display(),
                        times.len(),
                        r.k.len()
                    );
                }
                series.push(Series {
                    label: label(p),
                    xs: times,
                    ys: r.residual.clone(),
                });
            }
            ("Time vs residual", "wall time (s)", "residual", Scale::Linear, Scale::Log)
        }
        PlotKind::Trajectory2d => {
            for (p, r) in traces.iter().zip(&rows) {
                if r.coords.len() != 2 {
                    bail!(
                        "{}: trajectory plots need 2-dimensional traces, found {} coordinate columns",
                        p.display(),
                        r.coords.len()
                    );
                }
                series.push(Series {
                    label: label(p),
                    xs: r.coords[0].clone(),
                    ys: r.coords[1].clone(),
                });
            }
            ("Trajectory", "x0", "x1", Scale::Linear, Scale::Linear)
        }
    };
    Ok(Chart {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_scale,
        y_scale,
        series,
    })
}

pub fn cmd_plot(kind: PlotKind, traces: &[PathBuf], output: &Path) -> Result<()> {
    let svg = render(&chart(kind, traces)?)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        super::ensure_dir(dir)?;
    }
    fs::write(output, svg).with_context(|| format!("cannot write {}", output.display()))?;
    println!("wrote {}", output.display());
    Ok(())
}
