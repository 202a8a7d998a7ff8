use anyhow::{bail, Context, Result};
use hessdamp::analysis::{montecarlo_avoidance, MonteCarloReport};
use hessdamp::{validate_saddle_condition, Method};
use serde_json::json;

use super::{ensure_dir, write_json, Ctx, NumericalFailure};
use crate::config::RunConfig;
use crate::problem::build;

fn write_endpoints(path: &std::path::Path, report: &MonteCarloReport, d: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["index".to_string()];
    header.extend((0..d).map(|i| format!("start{i}")));
    header.extend((0..d).map(|i| format!("end{i}")));
    header.extend(["residual", "iterations", "min_hessian_eigenvalue", "class"].map(String::from));
    w.write_record(&header)?;
    for s in &report.samples {
        let mut row = vec![s.index.to_string()];
        row.extend(s.x0.iter().map(|v| v.to_string()));
        row.extend(s.endpoint.iter().map(|v| v.to_string()));
        row.push(s.residual.to_string());
        row.push(s.iterations.to_string());
        row.push(s.min_hessian_eigenvalue.to_string());
        row.push(s.class.name().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_montecarlo(cfg: &RunConfig, ctx: &Ctx) -> Result<()> {
    let built = build(cfg)?;
    if built.objective.hess(&built.x0).is_none() {
        bail!("problem `{}` provides no Hessian; endpoints cannot be classified", cfg.problem);
    }
    let params = cfg.solver_params()?;
    let init = built.init_box()?;
    let verdict = validate_saddle_condition(&params, Some(built.lipschitz))?;
    if !verdict.satisfied {
        if ctx.strict {
            return Err(NumericalFailure(format!(
                "saddle-avoidance condition not met: {}",
                verdict.message
            ))
            .into());
        }
        eprintln!("warning: saddle-avoidance condition not met: {}", verdict.message);
    }

    ensure_dir(&ctx.out)?;
    let mut schemes = serde_json::Map::new();
    for &scheme in &cfg.schemes {
        let method = Method::new(scheme, params.clone());
        let report = montecarlo_avoidance(
            &method,
            &built.objective,
            &init,
            cfg.n_samples,
            cfg.seed,
            cfg.classify_tol,
            ctx.parallel,
        )?;
        let name = scheme.name();
        write_endpoints(&ctx.out.join(format!("endpoints_{name}.csv")), &report, built.dim())?;
        println!(
            "{name:>6}: min {}, strict_saddle {}, degenerate {}, nonconverged {}",
            report.n_to_min, report.n_to_strict_saddle, report.n_degenerate, report.n_nonconverged
        );
        schemes.insert(
            name.to_string(),
            json!({
                "min": report.n_to_min,
                "strict_saddle": report.n_to_strict_saddle,
                "degenerate": report.n_degenerate,
                "nonconverged": report.n_nonconverged,
            }),
        );
    }
    let report = json!({
        "problem": cfg.problem.to_string(),
        "n_samples": cfg.n_samples,
        "seed": cfg.seed,
        "classify_tol": cfg.classify_tol,
        "box_lower": built.lower,
        "box_upper": built.upper,
        "lipschitz": built.lipschitz,
        "lipschitz_source": built.lipschitz_source.name(),
        "h": params.h,
        "beta": params.beta,
        "gamma": params.gamma.lower(),
        "max_iter": params.max_iter,
        "saddle_condition": { "satisfied": verdict.satisfied, "message": verdict.message },
        "schemes": schemes,
    });
    write_json(&ctx.out.join("montecarlo.json"), &report)
}
