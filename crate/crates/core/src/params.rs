//! Damping schedules, solver parameters and the step-size conditions that
//! guarantee convergence and saddle avoidance of the discrete schemes.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::{Objective, Point};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum GammaKind {
    Constant(f64),
    /// `mean + amplitude * cos(omega * t)`
    Cosine { mean: f64, amplitude: f64, omega: f64 },
    Custom {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
}

/// Viscous damping `t -> gamma(t)` with bounds `c <= gamma(t) <= C`.
#[derive(Clone)]
pub struct GammaSchedule {
    kind: GammaKind,
    lower: f64,
    upper: f64,
}

impl fmt::Debug for GammaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GammaKind::Constant(c) => write!(f, "GammaSchedule::Constant({c})"),
            GammaKind::Cosine {
                mean,
                amplitude,
                omega,
            } => write!(f, "GammaSchedule::Cosine({mean} + {amplitude} cos({omega} t))"),
            GammaKind::Custom { derivative, .. } => write!(
                f,
                "GammaSchedule::Custom([{}, {}], derivative: {})",
                self.lower,
                self.upper,
                derivative.is_some()
            ),
        }
    }
}

// Grid on which custom schedules are checked against their bounds.
const BOUND_CHECK_HORIZON: f64 = 1000.0;
const BOUND_CHECK_POINTS: usize = 10_001;

impl GammaSchedule {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constant gamma must be positive and finite, got {c}"
            )));
        }
        Ok(Self {
            kind: GammaKind::Constant(c),
            lower: c,
            upper: c,
        })
    }

    /// Oscillates between `lower` and `upper` with angular frequency `omega`;
    /// `gamma(0) = upper`.
    pub fn cosine(lower: f64, upper: f64, omega: f64) -> Result<Self> {
        check_bounds(lower, upper)?;
        if !omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be finite".into()));
        }
        Ok(Self {
            kind: GammaKind::Cosine {
                mean: 0.5 * (lower + upper),
                amplitude: 0.5 * (upper - lower),
                omega,
            },
            lower,
            upper,
        })
    }

    /// Arbitrary schedule. The bounds are checked on a uniform grid of
    /// `[0, 1000]`.
    pub fn custom(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        lower: f64,
        upper: f64,
    ) -> Result<Self> {
        check_bounds(lower, upper)?;
        let step = BOUND_CHECK_HORIZON / (BOUND_CHECK_POINTS - 1) as f64;
        for i in 0..BOUND_CHECK_POINTS {
            let t = i as f64 * step;
            let g = value(t);
            if !(g >= lower && g <= upper) {
                return Err(Error::InvalidParameter(format!(
                    "gamma({t}) = {g} outside [{lower}, {upper}]"
                )));
            }
        }
        Ok(Self {
            kind: GammaKind::Custom {
                value: Arc::new(value),
                derivative,
            },
            lower,
            upper,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            GammaKind::Constant(c) => *c,
            GammaKind::Cosine {
                mean,
                amplitude,
                omega,
            } => mean + amplitude * (omega * t).cos(),
            GammaKind::Custom { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Option<f64> {
        match &self.kind {
            GammaKind::Constant(_) => Some(0.0),
            GammaKind::Cosine {
                amplitude, omega, ..
            } => Some(-amplitude * omega * (omega * t).sin()),
            GammaKind::Custom { derivative, .. } => derivative.as_ref().map(|d| d(t)),
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative(0.0).is_some()
    }

    /// `c`
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// `C`
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, GammaKind::Constant(_))
    }
}

fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && lower <= upper) {
        return Err(Error::InvalidParameter(format!(
            "gamma bounds must satisfy 0 < c <= C, got c = {lower}, C = {upper}"
        )));
    }
    Ok(())
}

/// Parameters shared by the discretized schemes.
#[derive(Debug, Clone)]
pub struct SolverParams {
    /// Step size `h`.
    pub h: f64,
    /// Geometric (Hessian-driven) damping.
    pub beta: f64,
    pub gamma: GammaSchedule,
    pub max_iter: usize,
    pub residual_tol: f64,
}

impl SolverParams {
    pub const DEFAULT_MAX_ITER: usize = 1000;

    pub fn new(h: f64, beta: f64, gamma: GammaSchedule) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step size h must be positive, got {h}"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        Ok(Self {
            h,
            beta,
            gamma,
            max_iter: Self::DEFAULT_MAX_ITER,
            residual_tol: 0.0,
        })
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol.max(0.0);
        self
    }

    /// `gamma(k h)`
    pub fn gamma_at(&self, k: usize) -> f64 {
        self.gamma.value(k as f64 * self.h)
    }
}

/// Outcome of a parameter check. A failed check is not an error by itself;
/// callers decide whether to warn or abort.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub satisfied: bool,
    pub message: String,
}

impl Verdict {
    pub(crate) fn pass(message: String) -> Self {
        Self {
            satisfied: true,
            message,
        }
    }

    pub(crate) fn fail(message: String) -> Self {
        Self {
            satisfied: false,
            message,
        }
    }

    /// Turns a failed verdict into an error when `strict` is set.
    pub fn enforce(self, strict: bool) -> Result<Self> {
        if strict && !self.satisfied {
            Err(Error::ConditionViolated(self.message))
        } else {
            Ok(self)
        }
    }
}

fn check_lipschitz(lipschitz: Option<f64>) -> Result<f64> {
    let l = lipschitz.ok_or(Error::MissingLipschitz)?;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant must be positive, got {l}"
        )));
    }
    Ok(l)
}

/// `beta + h/2 < c/L`: Lyapunov decrease and square-summable residuals for
/// both discrete schemes.
pub fn validate_convergence_condition(
    params: &SolverParams,
    lipschitz: Option<f64>,
) -> Result<Verdict> {
    let l = check_lipschitz(lipschitz)?;
    let lhs = params.beta + 0.5 * params.h;
    let rhs = params.gamma.lower() / l;
    if lhs < rhs {
        Ok(Verdict::pass(format!(
            "beta + h/2 = {lhs} < c/L = {rhs} (margin {})",
            rhs - lhs
        )))
    } else {
        Ok(Verdict::fail(format!(
            "beta + h/2 = {lhs} >= c/L = {rhs}: violated by {}",
            lhs - rhs
        )))
    }
}

/// Conditions under which almost every initialization avoids strict saddles.
/// Requires constant viscous damping.
pub fn validate_saddle_condition(params: &SolverParams, lipschitz: Option<f64>) -> Result<Verdict> {
    let l = check_lipschitz(lipschitz)?;
    if !params.gamma.is_constant() {
        return Err(Error::NonConstantGamma);
    }
    let c = params.gamma.lower();
    let (beta, h) = (params.beta, params.h);

    if beta == 0.0 {
        let bound = 2.0 * c / l;
        return Ok(if h < bound {
            Verdict::pass(format!("beta = 0 and h = {h} < 2c/L = {bound}"))
        } else {
            Verdict::fail(format!("beta = 0 and h = {h} >= 2c/L = {bound}"))
        });
    }
    if beta >= c / l {
        return Ok(Verdict::fail(format!(
            "beta = {beta} >= c/L = {}",
            c / l
        )));
    }
    if ((beta * c) - 1.0).abs() <= 1e-12 {
        return Ok(Verdict::fail(format!("beta equals 1/c = {}", 1.0 / c)));
    }
    let bound = f64::min(2.0 * (c / l - beta), 1.0 / (l * beta));
    if h < bound {
        Ok(Verdict::pass(format!(
            "h = {h} < min(2(c/L - beta), 1/(L beta)) = {bound}"
        )))
    } else {
        Ok(Verdict::fail(format!(
            "h = {h} >= min(2(c/L - beta), 1/(L beta)) = {bound}"
        )))
    }
}

/// Per-iteration coefficients of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    /// Momentum weight `1 / (1 + gamma_k h)`.
    pub alpha: f64,
    /// Gradient-difference weight `beta h alpha`.
    pub beta: f64,
    /// Gradient step `h^2 alpha`.
    pub s: f64,
}

pub fn coefficients_at(params: &SolverParams, k: usize) -> StepCoefficients {
    let h = params.h;
    let alpha = 1.0 / (1.0 + params.gamma_at(k) * h);
    StepCoefficients {
        alpha,
        beta: params.beta * h * alpha,
        s: h * h * alpha,
    }
}

/// Non-certified estimate of the gradient Lipschitz constant: the largest
/// ratio `|grad(x) - grad(y)| / |x - y|` over `n_pairs` uniform pairs drawn
/// from the box `[lower, upper]`.
pub fn estimate_lipschitz<F: Objective + ?Sized>(
    f: &F,
    lower: &[f64],
    upper: &[f64],
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let d = f.dim();
    if lower.len() != d || upper.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: lower.len().min(upper.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Point::from_iterator(
            d,
            lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>()),
        )
    };
    let mut best = 0.0f64;
    for _ in 0..n_pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let dist = (&x - &y).norm();
        if dist == 0.0 {
            continue;
        }
        best = best.max((f.grad(&x) - f.grad(&y)).norm() / dist);
    }
    Ok(best)
}
