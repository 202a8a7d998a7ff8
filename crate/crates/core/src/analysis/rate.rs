//! Empirical convergence rates from distances to the limit.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::objective::{Objective, Point};
use crate::solvers::{run, Method};
use crate::trace::Trace;

pub const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateModel {
    /// `d_k ~ C rho^k`
    Linear,
    /// `d_k ~ C k^p`
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub model: RateModel,
    /// `exp(slope)` for the linear model.
    pub rho: Option<f64>,
    /// The slope itself for the power model.
    pub exponent: Option<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Sample indices used by the fit.
    pub window: Range<usize>,
}

/// Fits the last half of `distances` (at least [`MIN_WINDOW`] samples).
/// Sample `i` stands for iteration `k = i + 1`.
pub fn estimate_rate(distances: &[f64], model: RateModel) -> Result<RateEstimate> {
    let n = distances.len();
    let len = (n - n / 2).max(MIN_WINDOW).min(n);
    estimate_rate_window(distances, model, n - len..n)
}

pub fn estimate_rate_window(
    distances: &[f64],
    model: RateModel,
    window: Range<usize>,
) -> Result<RateEstimate> {
    if window.end > distances.len() || window.start > window.end {
        return Err(Error::InvalidParameter(format!(
            "window {window:?} outside 0..{}",
            distances.len()
        )));
    }
    if window.len() < MIN_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least {MIN_WINDOW} samples, got {}",
            window.len()
        )));
    }
    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    for i in window.clone() {
        let d = distances[i];
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NonPositiveDistance(i));
        }
        let k = (i + 1) as f64;
        xs.push(match model {
            RateModel::Linear => k,
            RateModel::Power => k.ln(),
        });
        ys.push(d.ln());
    }
    let m = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - x_mean, y - y_mean);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae have zero variance".into()));
    }
    if !(syy > 0.0) {
        return Err(Error::DegenerateFit("distances are constant over the window".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = (1.0 - sse / syy).clamp(0.0, 1.0);
    Ok(RateEstimate {
        model,
        rho: (model == RateModel::Linear).then(|| slope.exp()),
        exponent: (model == RateModel::Power).then_some(slope),
        slope,
        intercept,
        r_squared,
        window,
    })
}

/// `|x_k - x_inf|` for every record of `trace`.
pub fn distances_to(trace: &Trace, x_inf: &Point) -> Vec<f64> {
    trace.records.iter().map(|r| (&r.x - x_inf).norm()).collect()
}

/// Endpoint of a run four times as long as `method`'s own, with tolerance
/// stopping disabled; stands in for the unknown limit.
pub fn reference_limit<F: Objective + ?Sized>(
    method: &Method,
    f: &F,
    x0: &Point,
    x1: &Point,
) -> Result<Point> {
    let stop = method.stop_rule();
    let long = method.with_stop_rule(stop.max_iter.saturating_mul(4), 0.0);
    let trace = run(&long, f, x0, x1)?;
    if trace.diverged {
        return Err(Error::Divergence(trace.iterations()));
    }
    Ok(trace.last().x.clone())
}
