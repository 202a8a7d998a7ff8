//! Monte-Carlo check that random initializations avoid strict saddles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::{min_eigenvalue, Objective, Point};
use crate::solvers::{run, Method};

/// Axis-aligned box `[lower, upper]`; degenerate sides are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct InitBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl InitBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::InvalidParameter(
                "box bounds must be finite with lower <= upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// `[-r, r]^d`
    pub fn cube(d: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; d], vec![r; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Sample `index` of the stream identified by `seed`; independent of how
    /// many other samples are drawn or in which order.
    pub fn sample(&self, seed: u64, index: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Point::from_iterator(
            self.dim(),
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&l, &u)| l + (u - l) * rng.random::<f64>()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndpointClass {
    /// Residual below tolerance, positive definite Hessian.
    Minimum,
    /// Residual below tolerance, Hessian with a negative eigenvalue.
    StrictSaddle,
    /// Residual below tolerance, smallest Hessian eigenvalue within
    /// tolerance of zero.
    Degenerate,
    /// Residual still above tolerance after `max_iter`, or diverged.
    NonConverged,
}

impl EndpointClass {
    pub fn name(self) -> &'static str {
        match self {
            EndpointClass::Minimum => "min",
            EndpointClass::StrictSaddle => "strict_saddle",
            EndpointClass::Degenerate => "degenerate",
            EndpointClass::NonConverged => "nonconverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub index: usize,
    pub x0: Point,
    pub endpoint: Point,
    pub residual: f64,
    pub iterations: usize,
    pub min_hessian_eigenvalue: f64,
    pub class: EndpointClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub n_to_min: usize,
    pub n_to_strict_saddle: usize,
    pub n_degenerate: usize,
    pub n_nonconverged: usize,
    pub samples: Vec<SampleOutcome>,
}

fn classify<F: Objective + ?Sized>(
    method: &Method,
    f: &F,
    init: &InitBox,
    seed: u64,
    index: usize,
    classify_tol: f64,
) -> Result<SampleOutcome> {
    let x0 = init.sample(seed, index as u64);
    let trace = run(method, f, &x0, &x0)?;
    let last = trace.last();
    let converged = !trace.diverged && last.residual <= classify_tol;
    let lam = f
        .hess(&last.x)
        .map(|h| min_eigenvalue(&h))
        .ok_or(Error::MissingHessian)?;
    let class = if !converged {
        EndpointClass::NonConverged
    } else if lam.abs() <= classify_tol {
        EndpointClass::Degenerate
    } else if lam < 0.0 {
        EndpointClass::StrictSaddle
    } else {
        EndpointClass::Minimum
    };
    Ok(SampleOutcome {
        index,
        x0,
        endpoint: last.x.clone(),
        residual: last.residual,
        iterations: trace.iterations(),
        min_hessian_eigenvalue: lam,
        class,
    })
}

/// Runs `method` from `n_samples` points `x0 = x1` drawn uniformly from
/// `init`, and classifies each endpoint by residual and Hessian sign.
///
/// Runs stop once the residual drops to `classify_tol`. The caller is
/// expected to have checked the saddle-avoidance step-size condition.
/// Sample `i` draws from the ChaCha stream `i` of `seed`, so the report does
/// not depend on `parallel`.
pub fn montecarlo_avoidance<F: Objective + ?Sized>(
    method: &Method,
    f: &F,
    init: &InitBox,
    n_samples: usize,
    seed: u64,
    classify_tol: f64,
    parallel: bool,
) -> Result<MonteCarloReport> {
    if init.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            actual: init.dim(),
        });
    }
    if !(classify_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "classify_tol must be positive, got {classify_tol}"
        )));
    }
    if f.hess(&init.sample(seed, 0)).is_none() {
        return Err(Error::MissingHessian);
    }
    let method = method.with_stop_rule(method.stop_rule().max_iter, classify_tol);
    let one = |i: usize| classify(&method, f, init, seed, i, classify_tol);
    let samples: Vec<SampleOutcome> = if parallel {
        (0..n_samples).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..n_samples).map(one).collect::<Result<_>>()?
    };
    let count = |c: EndpointClass| samples.iter().filter(|s| s.class == c).count();
    Ok(MonteCarloReport {
        n_to_min: count(EndpointClass::Minimum),
        n_to_strict_saddle: count(EndpointClass::StrictSaddle),
        n_degenerate: count(EndpointClass::Degenerate),
        n_nonconverged: count(EndpointClass::NonConverged),
        samples,
    })
}
