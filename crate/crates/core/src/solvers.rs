//! Discrete inertial schemes with explicit (ISEHD) and implicit (ISIHD)
//! Hessian-driven damping, their free-coefficient variants, and the gradient
//! descent / heavy ball baselines.
//!
//! Every step evaluates the gradient exactly once. All schemes share the
//! update order `y = x + alpha (x - x_prev) [- beta_k dg]`,
//! `x_next = y - s g`, so that zeroed coefficients reproduce the simpler
//! schemes bit for bit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::analysis::lyapunov::lyapunov_constants;
use crate::error::{Error, Result};
use crate::objective::{is_finite, Objective, Point};
use crate::params::{coefficients_at, SolverParams, StepCoefficients, Verdict};
use crate::trace::{Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Isehd,
    Isihd,
    Gd,
    Hbf,
    IsehdGeneral,
    IsihdGeneral,
}

impl Scheme {
    pub const STANDARD: [Scheme; 4] = [Scheme::Isehd, Scheme::Isihd, Scheme::Gd, Scheme::Hbf];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Isehd => "isehd",
            Scheme::Isihd => "isihd",
            Scheme::Gd => "gd",
            Scheme::Hbf => "hbf",
            Scheme::IsehdGeneral => "isehd-general",
            Scheme::IsihdGeneral => "isihd-general",
        }
    }

    /// Schemes that cache the previous gradient.
    pub fn uses_gradient_difference(self) -> bool {
        matches!(self, Scheme::Isehd | Scheme::IsehdGeneral)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "isehd" => Scheme::Isehd,
            "isihd" => Scheme::Isihd,
            "gd" => Scheme::Gd,
            "hbf" => Scheme::Hbf,
            "isehd-general" => Scheme::IsehdGeneral,
            "isihd-general" => Scheme::IsihdGeneral,
            other => {
                return Err(Error::InvalidParameter(format!("unknown scheme `{other}`")))
            }
        })
    }
}

/// `(x_{k-1}, x_k)` plus the cached `grad f(x_{k-1})` of the explicit scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_prev: Point,
    pub x_curr: Point,
    pub g_prev: Option<Point>,
    /// Index of `x_curr`; a fresh state built from `(x_0, x_1)` has `k = 1`.
    pub k: usize,
}

impl SolverState {
    pub fn new(x0: Point, x1: Point) -> Result<Self> {
        if x0.len() != x1.len() {
            return Err(Error::DimensionMismatch {
                expected: x0.len(),
                actual: x1.len(),
            });
        }
        Ok(Self {
            x_prev: x0,
            x_curr: x1,
            g_prev: None,
            k: 1,
        })
    }

    /// Fills the previous-gradient cache (one gradient evaluation).
    pub fn with_prev_gradient<F: Objective + ?Sized>(mut self, f: &F) -> Self {
        self.g_prev = Some(f.grad(&self.x_prev));
        self
    }

    pub fn velocity(&self) -> Point {
        &self.x_curr - &self.x_prev
    }
}

type Sequence = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Free coefficient sequences `(alpha_k, beta_k, s_k)`.
#[derive(Clone)]
pub struct GeneralCoefficients {
    alpha: Sequence,
    beta: Sequence,
    s: Sequence,
}

impl fmt::Debug for GeneralCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.at(1);
        write!(
            f,
            "GeneralCoefficients {{ alpha_1: {}, beta_1: {}, s_1: {} }}",
            c.alpha, c.beta, c.s
        )
    }
}

impl GeneralCoefficients {
    pub fn new(
        alpha: impl Fn(usize) -> f64 + Send + Sync + 'static,
        beta: impl Fn(usize) -> f64 + Send + Sync + 'static,
        s: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            s: Arc::new(s),
        }
    }

    pub fn constant(alpha: f64, beta: f64, s: f64) -> Self {
        Self::new(move |_| alpha, move |_| beta, move |_| s)
    }

    /// The sequences of the explicit scheme: `(alpha_k, beta h alpha_k, h^2 alpha_k)`.
    pub fn explicit_from(params: &SolverParams) -> Self {
        let (a, b, s) = (params.clone(), params.clone(), params.clone());
        Self::new(
            move |k| coefficients_at(&a, k).alpha,
            move |k| coefficients_at(&b, k).beta,
            move |k| coefficients_at(&s, k).s,
        )
    }

    /// The sequences of the implicit scheme, with constant extrapolation
    /// `beta_k = beta / h`.
    pub fn implicit_from(params: &SolverParams) -> Self {
        let (a, s) = (params.clone(), params.clone());
        let beta_prime = params.beta / params.h;
        Self::new(
            move |k| coefficients_at(&a, k).alpha,
            move |_| beta_prime,
            move |k| coefficients_at(&s, k).s,
        )
    }

    pub fn at(&self, k: usize) -> StepCoefficients {
        StepCoefficients {
            alpha: (self.alpha)(k),
            beta: (self.beta)(k),
            s: (self.s)(k),
        }
    }

    /// `(inf s_k, sup s_k, sup weight_k)` over `k = 1..=horizon`.
    pub(crate) fn sup_over(
        &self,
        horizon: usize,
        weight: impl Fn(StepCoefficients) -> f64,
    ) -> (f64, f64, f64) {
        let mut s_min = f64::INFINITY;
        let mut s_max = 0.0f64;
        let mut w_max = f64::NEG_INFINITY;
        for k in 1..=horizon.max(1) {
            let c = self.at(k);
            s_min = s_min.min(c.s);
            s_max = s_max.max(c.s);
            w_max = w_max.max(weight(c));
        }
        (s_min, s_max, w_max)
    }

    fn validate(
        &self,
        lipschitz: f64,
        horizon: usize,
        weight: impl Fn(StepCoefficients) -> f64,
        label: &str,
    ) -> Verdict {
        let (s_min, s_bar, w) = self.sup_over(horizon, weight);
        if !(s_min > 0.0) {
            return Verdict::fail(format!("inf s_k = {s_min} is not positive"));
        }
        if s_bar >= 2.0 / lipschitz {
            return Verdict::fail(format!(
                "sup s_k = {s_bar} >= 2/L = {}",
                2.0 / lipschitz
            ));
        }
        let rhs = 1.0 / s_bar - 0.5 * lipschitz;
        if w < rhs {
            Verdict::pass(format!("sup {label} = {w} < 1/s - L/2 = {rhs}"))
        } else {
            Verdict::fail(format!("sup {label} = {w} >= 1/s - L/2 = {rhs}"))
        }
    }

    /// Conditions for the explicit scheme over the first `horizon` indices:
    /// `sup s_k < 2/L` and `sup (alpha_k + beta_k L)/s_k < 1/sup s_k - L/2`.
    pub fn validate_explicit(&self, lipschitz: f64, horizon: usize) -> Verdict {
        self.validate(
            lipschitz,
            horizon,
            |c| (c.alpha + c.beta * lipschitz) / c.s,
            "(alpha_k + beta_k L)/s_k",
        )
    }

    /// Same for the implicit scheme, with weight `beta_k L + alpha_k / s_k`.
    pub fn validate_implicit(&self, lipschitz: f64, horizon: usize) -> Verdict {
        self.validate(
            lipschitz,
            horizon,
            |c| c.beta * lipschitz + c.alpha / c.s,
            "beta_k L + alpha_k/s_k",
        )
    }
}

fn grad_checked<F: Objective + ?Sized>(f: &F, x: &Point, k: usize) -> Result<Point> {
    let g = f.grad(x);
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: g.len(),
        });
    }
    if !is_finite(&g) {
        return Err(Error::Divergence(k));
    }
    Ok(g)
}

fn advance(state: &SolverState, x_next: Point, g_prev: Option<Point>) -> Result<SolverState> {
    if !is_finite(&x_next) {
        return Err(Error::Divergence(state.k));
    }
    Ok(SolverState {
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        g_prev,
        k: state.k + 1,
    })
}

fn explicit_update<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    c: StepCoefficients,
) -> Result<SolverState> {
    let g = grad_checked(f, &state.x_curr, state.k)?;
    let g_prev = match &state.g_prev {
        Some(gp) => gp.clone(),
        // Only reached for states built without the cache.
        None => grad_checked(f, &state.x_prev, state.k)?,
    };
    let mut x_next = state.x_curr.clone();
    for i in 0..x_next.len() {
        let x = state.x_curr[i];
        let mut y = x + c.alpha * (x - state.x_prev[i]);
        // Skipped rather than subtracting a signed zero, so that beta = 0
        // matches heavy ball bit for bit.
        if c.beta != 0.0 {
            y -= c.beta * (g[i] - g_prev[i]);
        }
        x_next[i] = y - c.s * g[i];
    }
    advance(state, x_next, Some(g))
}

// `c.beta` is unused here; the extrapolation weight is passed separately.
fn implicit_update<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    c: StepCoefficients,
    extrapolation: f64,
) -> Result<SolverState> {
    let mut z = state.x_curr.clone();
    if extrapolation != 0.0 {
        for i in 0..z.len() {
            z[i] += extrapolation * (state.x_curr[i] - state.x_prev[i]);
        }
    }
    let g = grad_checked(f, &z, state.k)?;
    let mut x_next = state.x_curr.clone();
    for i in 0..x_next.len() {
        let x = state.x_curr[i];
        let y = x + c.alpha * (x - state.x_prev[i]);
        x_next[i] = y - c.s * g[i];
    }
    advance(state, x_next, None)
}

fn check_general(c: StepCoefficients, k: usize) -> Result<()> {
    if c.alpha > 0.0 && c.s > 0.0 && c.beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "coefficients at k = {k} must satisfy alpha > 0, s > 0, beta >= 0: {c:?}"
        )))
    }
}

fn require_constant_gamma(params: &SolverParams) -> Result<()> {
    if params.gamma.is_constant() {
        Ok(())
    } else {
        Err(Error::NonConstantGamma)
    }
}

/// One step of the explicit scheme:
/// `y_k = x_k + alpha_k v_k - beta_k (grad f(x_k) - grad f(x_{k-1}))`,
/// `x_{k+1} = y_k - s_k grad f(x_k)`.
pub fn isehd_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    params: &SolverParams,
) -> Result<SolverState> {
    explicit_update(state, f, coefficients_at(params, state.k))
}

/// One step of the implicit scheme: the gradient is taken at the
/// extrapolated point `x_k + (beta/h) v_k`.
pub fn isihd_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    params: &SolverParams,
) -> Result<SolverState> {
    implicit_update(state, f, coefficients_at(params, state.k), params.beta / params.h)
}

/// `x_{k+1} = x_k - h^2/(1 + gamma_0 h) grad f(x_k)`
pub fn gd_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    params: &SolverParams,
) -> Result<SolverState> {
    require_constant_gamma(params)?;
    let s = coefficients_at(params, state.k).s;
    let g = grad_checked(f, &state.x_curr, state.k)?;
    let mut x_next = state.x_curr.clone();
    for i in 0..x_next.len() {
        x_next[i] = state.x_curr[i] - s * g[i];
    }
    advance(state, x_next, None)
}

/// Heavy ball with friction: the explicit scheme without gradient
/// differences.
pub fn hbf_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    params: &SolverParams,
) -> Result<SolverState> {
    require_constant_gamma(params)?;
    let c = coefficients_at(params, state.k);
    let g = grad_checked(f, &state.x_curr, state.k)?;
    let mut x_next = state.x_curr.clone();
    for i in 0..x_next.len() {
        let x = state.x_curr[i];
        let y = x + c.alpha * (x - state.x_prev[i]);
        x_next[i] = y - c.s * g[i];
    }
    advance(state, x_next, None)
}

pub fn isehd_general_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    coeffs: &GeneralCoefficients,
) -> Result<SolverState> {
    let c = coeffs.at(state.k);
    check_general(c, state.k)?;
    explicit_update(state, f, c)
}

/// `x_{k+1} = x_k + alpha_k v_k - s_k grad f(x_k + beta_k v_k)`
pub fn isihd_general_step<F: Objective + ?Sized>(
    state: &SolverState,
    f: &F,
    coeffs: &GeneralCoefficients,
) -> Result<SolverState> {
    let c = coeffs.at(state.k);
    check_general(c, state.k)?;
    implicit_update(state, f, c, c.beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iter: usize,
    pub residual_tol: f64,
}

/// A scheme together with everything it needs to run.
#[derive(Debug, Clone)]
pub enum Method {
    Isehd(SolverParams),
    Isihd(SolverParams),
    Gd(SolverParams),
    Hbf(SolverParams),
    IsehdGeneral(GeneralCoefficients, StopRule),
    IsihdGeneral(GeneralCoefficients, StopRule),
}

impl Method {
    /// Builds one of the standard schemes; for the general variants the
    /// sequences are derived from `params`.
    pub fn new(scheme: Scheme, params: SolverParams) -> Self {
        let stop = StopRule {
            max_iter: params.max_iter,
            residual_tol: params.residual_tol,
        };
        match scheme {
            Scheme::Isehd => Method::Isehd(params),
            Scheme::Isihd => Method::Isihd(params),
            Scheme::Gd => Method::Gd(params),
            Scheme::Hbf => Method::Hbf(params),
            Scheme::IsehdGeneral => {
                Method::IsehdGeneral(GeneralCoefficients::explicit_from(&params), stop)
            }
            Scheme::IsihdGeneral => {
                Method::IsihdGeneral(GeneralCoefficients::implicit_from(&params), stop)
            }
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Method::Isehd(_) => Scheme::Isehd,
            Method::Isihd(_) => Scheme::Isihd,
            Method::Gd(_) => Scheme::Gd,
            Method::Hbf(_) => Scheme::Hbf,
            Method::IsehdGeneral(..) => Scheme::IsehdGeneral,
            Method::IsihdGeneral(..) => Scheme::IsihdGeneral,
        }
    }

    pub fn params(&self) -> Option<&SolverParams> {
        match self {
            Method::Isehd(p) | Method::Isihd(p) | Method::Gd(p) | Method::Hbf(p) => Some(p),
            _ => None,
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        match self {
            Method::Isehd(p) | Method::Isihd(p) | Method::Gd(p) | Method::Hbf(p) => StopRule {
                max_iter: p.max_iter,
                residual_tol: p.residual_tol,
            },
            Method::IsehdGeneral(_, s) | Method::IsihdGeneral(_, s) => *s,
        }
    }

    /// The same scheme with a different stopping rule.
    pub fn with_stop_rule(&self, max_iter: usize, residual_tol: f64) -> Method {
        let stop = StopRule {
            max_iter,
            residual_tol,
        };
        let reset = |p: &SolverParams| {
            p.clone()
                .with_max_iter(max_iter)
                .with_residual_tol(residual_tol)
        };
        match self {
            Method::Isehd(p) => Method::Isehd(reset(p)),
            Method::Isihd(p) => Method::Isihd(reset(p)),
            Method::Gd(p) => Method::Gd(reset(p)),
            Method::Hbf(p) => Method::Hbf(reset(p)),
            Method::IsehdGeneral(c, _) => Method::IsehdGeneral(c.clone(), stop),
            Method::IsihdGeneral(c, _) => Method::IsihdGeneral(c.clone(), stop),
        }
    }

    pub fn step<F: Objective + ?Sized>(&self, state: &SolverState, f: &F) -> Result<SolverState> {
        match self {
            Method::Isehd(p) => isehd_step(state, f, p),
            Method::Isihd(p) => isihd_step(state, f, p),
            Method::Gd(p) => gd_step(state, f, p),
            Method::Hbf(p) => hbf_step(state, f, p),
            Method::IsehdGeneral(c, _) => isehd_general_step(state, f, c),
            Method::IsihdGeneral(c, _) => isihd_general_step(state, f, c),
        }
    }
}

/// Iterates `method` from `(x0, x1)` until `max_iter` steps or until the
/// residual drops to `residual_tol`.
///
/// A non-finite gradient or iterate ends the run with `diverged` set; the
/// trace then holds every finite record produced before.
pub fn run<F: Objective + ?Sized>(method: &Method, f: &F, x0: &Point, x1: &Point) -> Result<Trace> {
    let d = f.dim();
    for x in [x0, x1] {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        if !is_finite(x) {
            return Err(Error::InvalidParameter("initial point is not finite".into()));
        }
    }
    if let Method::Gd(p) | Method::Hbf(p) = method {
        require_constant_gamma(p)?;
    }
    let stop = method.stop_rule();
    let scheme = method.scheme();
    let weight = f
        .lipschitz()
        .map(|l| lyapunov_constants(method, l, stop.max_iter).weight)
        .or_else(|| lipschitz_free_weight(method));

    let start = Instant::now();
    let mut trace = Trace {
        scheme,
        records: Vec::with_capacity(stop.max_iter.min(1 << 20) + 1),
        diverged: false,
        solver_grad_evals: 0,
        monitor_grad_evals: 0,
        wall_times: Vec::new(),
    };

    let mut state = SolverState::new(x0.clone(), x1.clone())?;
    if scheme.uses_gradient_difference() {
        state = state.with_prev_gradient(f);
        trace.solver_grad_evals += 1;
        if !state.g_prev.as_ref().is_some_and(is_finite) {
            trace.diverged = true;
        }
    }

    let record = |state: &SolverState, k: usize| -> (TraceRecord, bool) {
        let g = f.grad(&state.x_curr);
        let f_value = f.eval(&state.x_curr);
        let residual = g.norm();
        let step_norm = state.velocity().norm();
        let lyapunov = weight.map_or(f64::NAN, |w| f_value + 0.5 * w * step_norm * step_norm);
        let finite = residual.is_finite() && f_value.is_finite();
        (
            TraceRecord {
                k,
                x: state.x_curr.clone(),
                f_value,
                residual,
                lyapunov,
                step_norm,
            },
            finite,
        )
    };

    let (first, finite) = record(&state, 0);
    trace.monitor_grad_evals += 1;
    if !finite {
        trace.diverged = true;
    }
    let mut residual = first.residual;
    trace.records.push(first);
    trace.wall_times.push(start.elapsed().as_secs_f64());

    let mut iter = 0;
    while !trace.diverged && iter < stop.max_iter && residual > stop.residual_tol {
        let next = match method.step(&state, f) {
            Ok(s) => s,
            Err(Error::Divergence(_)) => {
                trace.diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        trace.solver_grad_evals += 1;
        iter += 1;
        state = next;
        let (rec, finite) = record(&state, iter);
        trace.monitor_grad_evals += 1;
        if !finite {
            trace.diverged = true;
            break;
        }
        residual = rec.residual;
        trace.records.push(rec);
        trace.wall_times.push(start.elapsed().as_secs_f64());
    }
    Ok(trace)
}

// Weights that do not involve L.
fn lipschitz_free_weight(method: &Method) -> Option<f64> {
    match method {
        Method::Gd(_) => Some(0.0),
        Method::Hbf(p) => Some(1.0 / (p.h * p.h)),
        Method::Isehd(p) | Method::Isihd(p) if p.beta == 0.0 => Some(1.0 / (p.h * p.h)),
        _ => None,
    }
}
