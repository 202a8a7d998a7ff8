//! The trace CSV schema: `k,f,residual,step_norm,lyapunov` followed by one
//! `x<i>` column per coordinate when the dimension is at most 4. Wall time
//! lives in a sidecar `k,wall_time` file so the trace itself is reproducible.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hessdamp::Trace;

pub const BASE_COLUMNS: [&str; 5] = ["k", "f", "residual", "step_norm", "lyapunov"];
pub const MAX_COORDINATE_DIM: usize = 4;

pub fn trace_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("trace_{label}.csv"))
}

/// `trace_<label>.csv` -> `timing_<label>.csv` in the same directory.
pub fn timing_path_for(trace: &Path) -> PathBuf {
    let name = trace
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    let label = name
        .strip_prefix("trace_")
        .unwrap_or(name)
        .trim_end_matches(".csv");
    trace.with_file_name(format!("timing_{label}.csv"))
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let d = trace.records.first().map_or(0, |r| r.x.len());
    let coords = if d <= MAX_COORDINATE_DIM { d } else { 0 };
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..coords).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![
            r.k.to_string(),
            r.f_value.to_string(),
            r.residual.to_string(),
            r.step_norm.to_string(),
            r.lyapunov.to_string(),
        ];
        row.extend(r.x.iter().take(coords).map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing(path: &Path, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["k", "wall_time"])?;
    for (r, t) in trace.records.iter().zip(&trace.wall_times) {
        w.write_record([r.k.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRows {
    pub k: Vec<f64>,
    pub residual: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
}

fn parse_field(value: &str, path: &Path, line: usize) -> Result<f64> {
    value
        .trim()
        .parse()
        .with_context(|| format!("{}:{line}: `{value}` is not a number", path.display()))
}

pub fn read_trace(path: &Path) -> Result<TraceRows> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < BASE_COLUMNS.len() || names[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        bail!(
            "{}: header must start with {}",
            path.display(),
            BASE_COLUMNS.join(",")
        );
    }
    let d = names.len() - BASE_COLUMNS.len();
    for (i, name) in names[BASE_COLUMNS.len()..].iter().enumerate() {
        if *name != format!("x{i}") {
            bail!("{}: unexpected column `{name}`", path.display());
        }
    }
    let mut rows = TraceRows {
        k: Vec::new(),
        residual: Vec::new(),
        coords: vec![Vec::new(); d],
    };
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        rows.k.push(parse_field(&record[0], path, line)?);
        rows.residual.push(parse_field(&record[2], path, line)?);
        for j in 0..d {
            rows.coords[j].push(parse_field(&record[BASE_COLUMNS.len() + j], path, line)?);
        }
    }
    if rows.k.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(rows)
}

pub fn read_timing(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read timing sidecar {}", path.display()))?;
    r.records()
        .enumerate()
        .map(|(i, rec)| parse_field(&rec?[1], path, i + 2))
        .collect()
}
