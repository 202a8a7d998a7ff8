use anyhow::Result;
use hessdamp::analysis::lyapunov_constants;
use hessdamp::problems::{pgm_write, Image};
use hessdamp::{
    run, validate_convergence_condition, validate_saddle_condition, Error, Method,
    SolverParams, Trace, Verdict,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{ensure_dir, write_json, Ctx, NumericalFailure};
use crate::config::RunConfig;
use crate::problem::{build, Built};
use crate::traces::{trace_path, write_timing, write_trace, MAX_COORDINATE_DIM};

fn verdict_json(v: &Result<Verdict, Error>) -> Value {
    match v {
        Ok(v) => json!({ "satisfied": v.satisfied, "message": v.message }),
        Err(e) => json!({ "satisfied": Value::Null, "message": e.to_string() }),
    }
}

fn without_beta(p: &SolverParams) -> SolverParams {
    SolverParams {
        beta: 0.0,
        ..p.clone()
    }
}

/// Step-size conditions for Lyapunov decrease and for saddle avoidance, as
/// they apply to `method`.
pub fn verdicts(method: &Method, lipschitz: f64) -> (Result<Verdict, Error>, Result<Verdict, Error>) {
    let l = Some(lipschitz);
    match method {
        Method::Isehd(p) | Method::Isihd(p) => (
            validate_convergence_condition(p, l),
            validate_saddle_condition(p, l),
        ),
        Method::Hbf(p) => (
            validate_convergence_condition(&without_beta(p), l),
            validate_saddle_condition(&without_beta(p), l),
        ),
        Method::Gd(_) => {
            let delta = lyapunov_constants(method, lipschitz, 0).delta;
            let v = if delta > 0.0 {
                Verdict {
                    satisfied: true,
                    message: format!("step h^2/(1 + c h) < 2/L (delta = {delta})"),
                }
            } else {
                Verdict {
                    satisfied: false,
                    message: format!("step h^2/(1 + c h) >= 2/L (delta = {delta})"),
                }
            };
            (Ok(v), Err(Error::InvalidParameter("no saddle condition for gradient descent".into())))
        }
        Method::IsehdGeneral(c, stop) => (
            Ok(c.validate_explicit(lipschitz, stop.max_iter)),
            Err(Error::InvalidParameter("no saddle condition for free coefficients".into())),
        ),
        Method::IsihdGeneral(c, stop) => (
            Ok(c.validate_implicit(lipschitz, stop.max_iter)),
            Err(Error::InvalidParameter("no saddle condition for free coefficients".into())),
        ),
    }
}

fn restored_image(built: &Built, trace: &Trace) -> Option<Image> {
    let img = &built.images.as_ref()?.observation;
    Image::from_point(img.width(), img.height(), &trace.last().x).ok()
}

pub fn cmd_run(cfg: &RunConfig, ctx: &Ctx) -> Result<()> {
    let built = build(cfg)?;
    let params = cfg.solver_params()?;
    let methods: Vec<Method> = cfg
        .schemes
        .iter()
        .map(|&s| Method::new(s, params.clone()))
        .collect();

    let mut checks = Vec::new();
    let mut violated = Vec::new();
    for m in &methods {
        let (conv, saddle) = verdicts(m, built.lipschitz);
        if let Ok(v) = &conv {
            if !v.satisfied {
                eprintln!("warning: {}: convergence condition not met: {}", m.scheme(), v.message);
                violated.push(format!("{}: {}", m.scheme(), v.message));
            }
        }
        checks.push((conv, saddle));
    }
    if ctx.strict && !violated.is_empty() {
        return Err(NumericalFailure(format!(
            "refusing to run under --strict: {}",
            violated.join("; ")
        ))
        .into());
    }

    let one = |m: &Method| run(m, &built.objective, &built.x0, &built.x1);
    let traces: Vec<Trace> = if ctx.parallel {
        methods.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        methods.iter().map(one).collect::<Result<_, _>>()?
    };

    ensure_dir(&ctx.out)?;
    if let Some(images) = &built.images {
        pgm_write(ctx.out.join("truth.pgm"), &images.truth)?;
        pgm_write(ctx.out.join("observation.pgm"), &images.observation)?;
    }

    let mut schemes = serde_json::Map::new();
    let mut diverged = Vec::new();
    for ((m, t), (conv, saddle)) in methods.iter().zip(&traces).zip(&checks) {
        let name = m.scheme().name();
        write_trace(&trace_path(&ctx.out, name), t)?;
        write_timing(&ctx.out.join(format!("timing_{name}.csv")), t)?;
        if let Some(img) = restored_image(&built, t) {
            pgm_write(ctx.out.join(format!("restored_{name}.pgm")), &img.clamp01())?;
        }
        let last = t.last();
        if t.diverged {
            diverged.push(name);
            eprintln!("warning: {name}: diverged after {} iterations", t.iterations());
        }
        let mut entry = json!({
            "iterations": t.iterations(),
            "final_f": last.f_value,
            "final_residual": last.residual,
            "diverged": t.diverged,
            "wall_time_s": t.wall_times.last().copied().unwrap_or(0.0),
            "solver_grad_evals": t.solver_grad_evals,
            "convergence_condition": verdict_json(conv),
            "saddle_condition": verdict_json(saddle),
        });
        if built.dim() <= MAX_COORDINATE_DIM {
            entry["final_x"] = json!(last.x.iter().collect::<Vec<_>>());
        }
        println!(
            "{name:>6}: {} iterations, f = {:.6e}, residual = {:.3e}{}",
            t.iterations(),
            last.f_value,
            last.residual,
            if t.diverged { " (diverged)" } else { "" }
        );
        schemes.insert(name.to_string(), entry);
    }

    let summary = json!({
        "problem": cfg.problem.to_string(),
        "dimension": built.dim(),
        "lipschitz": built.lipschitz,
        "lipschitz_source": built.lipschitz_source.name(),
        "h": params.h,
        "beta": params.beta,
        "gamma_lower": params.gamma.lower(),
        "gamma_upper": params.gamma.upper(),
        "max_iter": params.max_iter,
        "residual_tol": params.residual_tol,
        "schemes": schemes,
    });
    write_json(&ctx.out.join("summary.json"), &summary)?;

    if ctx.strict && !diverged.is_empty() {
        return Err(NumericalFailure(format!("diverged: {}", diverged.join(", "))).into());
    }
    Ok(())
}
