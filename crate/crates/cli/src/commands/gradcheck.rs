use anyhow::Result;
use hessdamp::problems::gradient_check;
use hessdamp::Objective;

use super::NumericalFailure;
use crate::config::RunConfig;
use crate::problem::{build, Corrupted};

pub const THRESHOLD: f64 = 1e-4;

pub fn cmd_gradcheck(cfg: &RunConfig, corrupt: bool) -> Result<()> {
    let built = build(cfg)?;
    let init = built.init_box()?;
    let points: Vec<_> = (0..cfg.gradcheck_points as u64)
        .map(|i| init.sample(cfg.seed, i))
        .collect();
    let f: Box<dyn Objective> = if corrupt {
        Box::new(Corrupted(built.objective))
    } else {
        built.objective
    };
    let check = gradient_check(&f, &points, cfg.gradcheck_step);
    println!(
        "{}: max relative gradient error {:.3e} over {} points (worst at point {}), threshold {THRESHOLD:e}",
        cfg.problem, check.max_rel_error, check.n_points, check.worst_point
    );
    if check.max_rel_error < THRESHOLD {
        Ok(())
    } else {
        Err(NumericalFailure(format!(
            "gradient check failed: {:.3e} >= {THRESHOLD:e}",
            check.max_rel_error
        ))
        .into())
    }
}
