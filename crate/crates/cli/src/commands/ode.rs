use anyhow::{bail, Context, Result};
use hessdamp::dynamics::{initial_phase, integrate};
use hessdamp::Point;
use serde_json::json;

use super::{ensure_dir, write_json, Ctx, NumericalFailure};
use crate::config::RunConfig;
use crate::problem::build;

pub fn cmd_ode(cfg: &RunConfig, ctx: &Ctx) -> Result<()> {
    let built = build(cfg)?;
    let d = built.dim();
    let v0 = match &cfg.v0 {
        Some(v) if v.len() == d => Point::from_column_slice(v),
        Some(v) => bail!("`init.v0` has {} entries but the problem has dimension {d}", v.len()),
        None => Point::zeros(d),
    };
    let gamma = cfg.solver_params()?.gamma;
    let (system, beta) = (cfg.system, cfg.beta);
    let phase = initial_phase(system, &built.x0, &v0, &built.objective, beta, &gamma)?;
    let trace = integrate(system, &phase, &built.objective, beta, &gamma, cfg.dt, cfg.horizon)?;

    ensure_dir(&ctx.out)?;
    let path = ctx.out.join(format!("ode_{system}.csv"));
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.push("energy".into());
    w.write_record(&header)?;
    for (s, e) in trace.states.iter().zip(&trace.energies) {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x.iter().map(|v| v.to_string()));
        row.push(e.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;

    let increase = trace.max_energy_increase();
    let tolerance = 10.0 * cfg.dt.powi(4);
    println!(
        "{system}: {} steps to t = {}, energy {:.6e} -> {:.6e}, max increment {increase:.3e}",
        trace.states.len() - 1,
        trace.last().t,
        trace.energies[0],
        trace.energies.last().copied().unwrap_or(f64::NAN),
    );
    write_json(
        &ctx.out.join(format!("ode_{system}_summary.json")),
        &json!({
            "system": system.name(),
            "beta": beta,
            "dt": cfg.dt,
            "horizon": cfg.horizon,
            "steps": trace.states.len() - 1,
            "diverged": trace.diverged,
            "initial_energy": trace.energies[0],
            "final_energy": trace.energies.last(),
            "max_energy_increase": increase,
            "energy_tolerance_per_step": tolerance,
        }),
    )?;
    if ctx.strict && (trace.diverged || increase > tolerance) {
        return Err(NumericalFailure(format!(
            "energy grew by {increase:e} in one step (tolerance {tolerance:e}){}",
            if trace.diverged { "; integration diverged" } else { "" }
        ))
        .into());
    }
    Ok(())
}
