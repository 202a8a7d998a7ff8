//! Experiment configuration: a TOML file of flat dotted keys, optionally
//! starting from an embedded preset, with `key=value` overrides on top.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use hessdamp::dynamics::System;
use hessdamp::{GammaSchedule, Scheme, SolverParams};
use toml::Value;

pub const PRESETS: [(&str, &str); 5] = [
    ("rosenbrock", include_str!("../presets/rosenbrock.toml")),
    ("rosenbrock-beta04", include_str!("../presets/rosenbrock-beta04.toml")),
    ("deblur", include_str!("../presets/deblur.toml")),
    ("double-well-saddle", include_str!("../presets/double-well-saddle.toml")),
    ("quadratic-ode", include_str!("../presets/quadratic-ode.toml")),
];

pub fn preset(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            anyhow!("unknown preset `{name}`; available: {}", known.join(", "))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Rosenbrock,
    Quadratic,
    DoubleWell,
    Deblur,
}

impl FromStr for ProblemKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rosenbrock" => ProblemKind::Rosenbrock,
            "quadratic" => ProblemKind::Quadratic,
            "double_well" | "double-well" => ProblemKind::DoubleWell,
            "deblur" => ProblemKind::Deblur,
            other => bail!("unknown problem `{other}`; expected rosenbrock, quadratic, double_well or deblur"),
        })
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Rosenbrock => "rosenbrock",
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::DoubleWell => "double_well",
            ProblemKind::Deblur => "deblur",
        })
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    pub dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DeblurSpec {
    pub size: usize,
    pub image: Option<PathBuf>,
    pub mu: f64,
    pub rho: f64,
    pub noise: f64,
    pub noise_seed: u64,
    pub kernel_size: usize,
    pub kernel_sigma: f64,
}

#[derive(Debug, Clone)]
pub enum GammaSpec {
    Constant(f64),
    Cosine { lower: f64, upper: f64, omega: f64 },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub quadratic: QuadraticSpec,
    pub deblur: DeblurSpec,
    /// Overrides the problem's own Lipschitz constant (or the sampled estimate).
    pub lipschitz: Option<f64>,
    pub schemes: Vec<Scheme>,
    pub h: f64,
    pub beta: f64,
    pub gamma: GammaSpec,
    pub max_iter: usize,
    pub tol: f64,
    pub x0: Option<Vec<f64>>,
    pub x1: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub box_lower: Option<Vec<f64>>,
    pub box_upper: Option<Vec<f64>>,
    pub seed: u64,
    pub n_samples: usize,
    pub classify_tol: f64,
    pub system: System,
    pub dt: f64,
    pub horizon: f64,
    pub gradcheck_points: usize,
    pub gradcheck_step: f64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn solver_params(&self) -> Result<SolverParams> {
        let gamma = match self.gamma {
            GammaSpec::Constant(c) => GammaSchedule::constant(c)?,
            GammaSpec::Cosine {
                lower,
                upper,
                omega,
            } => GammaSchedule::cosine(lower, upper, omega)?,
        };
        Ok(SolverParams::new(self.h, self.beta, gamma)?
            .with_max_iter(self.max_iter)
            .with_residual_tol(self.tol))
    }
}

/// Flattens nested tables into `a.b.c` keys.
fn flatten(prefix: &str, value: Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        v => {
            out.insert(prefix.to_string(), v);
        }
    }
}

pub fn parse_flat(text: &str, origin: &str) -> Result<BTreeMap<String, Value>> {
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("cannot parse config {origin}"))?;
    let mut out = BTreeMap::new();
    flatten("", Value::Table(table), &mut out);
    Ok(out)
}

/// `key=value`, where `value` is read as TOML and falls back to a bare string.
pub fn parse_override(spec: &str) -> Result<(String, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    let key = key.trim().to_string();
    if key.is_empty() {
        bail!("override `{spec}` has an empty key");
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Layers preset, config file and overrides, later ones winning.
pub fn load(
    preset_name: Option<&str>,
    config_path: Option<&Path>,
    overrides: &[String],
) -> Result<BTreeMap<String, Value>> {
    let mut map = BTreeMap::new();
    if let Some(name) = preset_name {
        map.extend(parse_flat(preset(name)?, &format!("preset `{name}`"))?);
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        map.extend(parse_flat(&text, &path.display().to_string())?);
    }
    for spec in overrides {
        let (k, v) = parse_override(spec)?;
        map.insert(k, v);
    }
    Ok(map)
}

struct Keys(BTreeMap<String, Value>);

impl Keys {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.opt_f64(key).map(|v| v.unwrap_or(default))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(x)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(v) => bail!("`{key}` must be a number, got {v}"),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if i >= 0 => Ok(i as u64),
            Some(v) => bail!("`{key}` must be a nonnegative integer, got {v}"),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64(key, default as u64)? as usize)
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => bail!("`{key}` must be a string, got {v}"),
        }
    }

    fn vec(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(x),
                    Value::Integer(i) => Ok(i as f64),
                    v => bail!("`{key}` must hold numbers, got {v}"),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => bail!("`{key}` must be an array of numbers, got {v}"),
        }
    }

    fn strings(&mut self, key: &str) -> Result<Option<Vec<String>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.split(',').map(|p| p.trim().to_string()).collect())),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s),
                    v => bail!("`{key}` must hold strings, got {v}"),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => bail!("`{key}` must be a list of strings, got {v}"),
        }
    }
}

pub fn resolve(map: BTreeMap<String, Value>) -> Result<RunConfig> {
    let mut k = Keys(map);
    let problem: ProblemKind = k
        .string("problem")?
        .ok_or_else(|| anyhow!("config must set `problem`"))?
        .parse()?;

    let quadratic = QuadraticSpec {
        dim: k.usize("quadratic.dim", 10)?,
        lambda_min: k.f64("quadratic.lambda_min", 0.5)?,
        lambda_max: k.f64("quadratic.lambda_max", 10.0)?,
        seed: k.u64("quadratic.seed", 0)?,
    };
    let deblur = DeblurSpec {
        size: k.usize("deblur.size", 256)?,
        image: k.string("deblur.image")?.map(PathBuf::from),
        mu: k.f64("deblur.mu", hessdamp::problems::deblur::DEFAULT_MU)?,
        rho: k.f64("deblur.rho", hessdamp::problems::deblur::DEFAULT_RHO)?,
        noise: k.f64("deblur.noise", hessdamp::problems::deblur::DEFAULT_NOISE_SIGMA)?,
        noise_seed: k.u64("deblur.noise_seed", 42)?,
        kernel_size: k.usize("deblur.kernel_size", 5)?,
        kernel_sigma: k.f64("deblur.kernel_sigma", 1.5)?,
    };

    let schemes = match k.strings("schemes")? {
        None => Scheme::STANDARD.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Scheme>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?,
    };
    if schemes.is_empty() {
        bail!("`schemes` must name at least one scheme");
    }

    let gamma = match k.string("solver.gamma_schedule")?.as_deref() {
        None | Some("constant") => GammaSpec::Constant(k.f64("solver.gamma", 3.0)?),
        Some("cosine") => GammaSpec::Cosine {
            lower: k.f64("solver.gamma_lower", 1.0)?,
            upper: k.f64("solver.gamma_upper", 3.0)?,
            omega: k.f64("solver.gamma_omega", 1.0)?,
        },
        Some(other) => bail!("unknown gamma schedule `{other}`; expected constant or cosine"),
    };

    let system = match k.string("ode.system")? {
        None => System::Isihd,
        Some(s) => s.parse()?,
    };

    let cfg = RunConfig {
        problem,
        quadratic,
        deblur,
        lipschitz: k.opt_f64("lipschitz")?,
        schemes,
        h: k.f64("solver.h", 1e-3)?,
        beta: k.f64("solver.beta", 0.02)?,
        gamma,
        max_iter: k.usize("solver.max_iter", 1000)?,
        tol: k.f64("solver.tol", 0.0)?,
        x0: k.vec("init.x0")?,
        x1: k.vec("init.x1")?,
        v0: k.vec("init.v0")?,
        box_lower: k.vec("init.box_lower")?,
        box_upper: k.vec("init.box_upper")?,
        seed: k.u64("seed", 0)?,
        n_samples: k.usize("montecarlo.n_samples", 1000)?,
        classify_tol: k.f64("montecarlo.classify_tol", 1e-6)?,
        system,
        dt: k.f64("ode.dt", 1e-3)?,
        horizon: k.f64("ode.horizon", 10.0)?,
        gradcheck_points: k.usize("gradcheck.points", 20)?,
        gradcheck_step: k.f64("gradcheck.step", 1e-6)?,
        out: PathBuf::from(k.string("output.dir")?.unwrap_or_else(|| "out".into())),
    };
    if let Some(key) = k.0.keys().next() {
        bail!("unknown config key `{key}`");
    }
    Ok(cfg)
}
