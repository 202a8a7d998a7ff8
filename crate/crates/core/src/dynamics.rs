//! Continuous-time inertial systems with Hessian-driven damping, integrated in
//! their first-order, Hessian-free phase-space form.
//!
//! Explicit damping, `x'' + gamma x' + beta Hess f(x) x' + grad f(x) = 0`:
//!
//! ```text
//! x' = -beta grad f(x) + (1/beta - gamma) x - y/beta
//! y' = (1/beta - gamma - beta gamma') x - y/beta
//! ```
//!
//! Implicit damping, `x'' + gamma x' + grad f(x + beta x') = 0`:
//!
//! ```text
//! x' = (y - x)/beta
//! y' = -beta grad f(y) - (1/beta - gamma)(x - y)
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::{is_finite, Objective, Point};
use crate::params::GammaSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    Isehd,
    Isihd,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Isehd => "isehd",
            System::Isihd => "isihd",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "isehd" => Ok(System::Isehd),
            "isihd" => Ok(System::Isihd),
            other => Err(Error::InvalidParameter(format!("unknown system `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub x: Point,
    pub y: Point,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "the phase-space form needs beta > 0, got {beta}"
        )))
    }
}

fn check_dims(d: usize, a: &Point, b: &Point) -> Result<()> {
    for v in [a, b] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: v.len(),
            });
        }
    }
    Ok(())
}

pub fn isehd_vector_field<F: Objective + ?Sized>(
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> Result<(Point, Point)> {
    check_beta(beta)?;
    let dgamma = gamma.derivative(s.t).ok_or(Error::MissingGammaDerivative)?;
    let g = gamma.value(s.t);
    let a = 1.0 / beta - g;
    let grad = f.grad(&s.x);
    let mut dx = Point::zeros(s.x.len());
    let mut dy = Point::zeros(s.x.len());
    for i in 0..s.x.len() {
        dx[i] = -beta * grad[i] + a * s.x[i] - s.y[i] / beta;
        dy[i] = (a - beta * dgamma) * s.x[i] - s.y[i] / beta;
    }
    Ok((dx, dy))
}

pub fn isihd_vector_field<F: Objective + ?Sized>(
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> Result<(Point, Point)> {
    check_beta(beta)?;
    let a = 1.0 / beta - gamma.value(s.t);
    let grad = f.grad(&s.y);
    let mut dx = Point::zeros(s.x.len());
    let mut dy = Point::zeros(s.x.len());
    for i in 0..s.x.len() {
        let diff = s.x[i] - s.y[i];
        dx[i] = -diff / beta;
        dy[i] = -beta * grad[i] - a * diff;
    }
    Ok((dx, dy))
}

pub fn vector_field<F: Objective + ?Sized>(
    system: System,
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> Result<(Point, Point)> {
    match system {
        System::Isehd => isehd_vector_field(s, f, beta, gamma),
        System::Isihd => isihd_vector_field(s, f, beta, gamma),
    }
}

/// Phase state at `t = 0` for the initial position `x0` and velocity `v0`.
pub fn initial_phase<F: Objective + ?Sized>(
    system: System,
    x0: &Point,
    v0: &Point,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> Result<PhaseState> {
    check_beta(beta)?;
    check_dims(f.dim(), x0, v0)?;
    let y = match system {
        System::Isehd => {
            let g = f.grad(x0);
            let a = 1.0 - beta * gamma.value(0.0);
            Point::from_fn(x0.len(), |i, _| -beta * (v0[i] + beta * g[i]) + a * x0[i])
        }
        System::Isihd => x0 + beta * v0,
    };
    Ok(PhaseState {
        t: 0.0,
        x: x0.clone(),
        y,
    })
}

/// `x'` recovered from the phase state.
pub fn velocity<F: Objective + ?Sized>(
    system: System,
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> Point {
    match system {
        System::Isehd => {
            let a = 1.0 / beta - gamma.value(s.t);
            let g = f.grad(&s.x);
            Point::from_fn(s.x.len(), |i, _| -beta * g[i] + a * s.x[i] - s.y[i] / beta)
        }
        System::Isihd => (&s.y - &s.x) / beta,
    }
}

/// Lyapunov energy: `f(x) + |x' + beta grad f(x)|^2 / 2` for explicit
/// damping, `f(x + beta x') + |x'|^2 / 2` for implicit damping.
pub fn energy<F: Objective + ?Sized>(
    system: System,
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
) -> f64 {
    match system {
        System::Isehd => {
            let a = 1.0 / beta - gamma.value(s.t);
            let w = Point::from_fn(s.x.len(), |i, _| a * s.x[i] - s.y[i] / beta);
            f.eval(&s.x) + 0.5 * w.norm_squared()
        }
        System::Isihd => {
            let v = (&s.y - &s.x) / beta;
            f.eval(&s.y) + 0.5 * v.norm_squared()
        }
    }
}

/// Decay constant `min(c/2, beta (1 - beta C^2 / (2c)))` of the energy
/// inequality `V' <= -delta_1 (|x'|^2 + |grad f(x)|^2)`.
pub fn energy_decay_constant(beta: f64, gamma: &GammaSchedule) -> f64 {
    let (c, cap) = (gamma.lower(), gamma.upper());
    f64::min(0.5 * c, beta * (1.0 - beta * cap * cap / (2.0 * c)))
}

#[derive(Debug, Clone)]
pub struct ContinuousTrace {
    pub system: System,
    /// One state per step, starting with the initial one.
    pub states: Vec<PhaseState>,
    pub velocities: Vec<Point>,
    pub energies: Vec<f64>,
    /// Set when a non-finite state stopped the integration early.
    pub diverged: bool,
}

impl ContinuousTrace {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trace holds the initial state")
    }

    /// Largest single-step energy increase, or 0 when the energy never grows.
    pub fn max_energy_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

fn axpy(s: &PhaseState, dt: f64, k: &(Point, Point)) -> PhaseState {
    PhaseState {
        t: s.t + dt,
        x: &s.x + dt * &k.0,
        y: &s.y + dt * &k.1,
    }
}

fn rk4_step<F: Objective + ?Sized>(
    system: System,
    s: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
    dt: f64,
) -> Result<PhaseState> {
    let k1 = vector_field(system, s, f, beta, gamma)?;
    let k2 = vector_field(system, &axpy(s, 0.5 * dt, &k1), f, beta, gamma)?;
    let k3 = vector_field(system, &axpy(s, 0.5 * dt, &k2), f, beta, gamma)?;
    let k4 = vector_field(system, &axpy(s, dt, &k3), f, beta, gamma)?;
    let w = dt / 6.0;
    Ok(PhaseState {
        t: s.t + dt,
        x: &s.x + w * (&k1.0 + 2.0 * &k2.0 + 2.0 * &k3.0 + &k4.0),
        y: &s.y + w * (&k1.1 + 2.0 * &k2.1 + 2.0 * &k3.1 + &k4.1),
    })
}

/// Classical fixed-step RK4 from `phase0.t` to `phase0.t + horizon`. The
/// last step is shortened when `horizon` is not a multiple of `dt`.
pub fn integrate<F: Objective + ?Sized>(
    system: System,
    phase0: &PhaseState,
    f: &F,
    beta: f64,
    gamma: &GammaSchedule,
    dt: f64,
    horizon: f64,
) -> Result<ContinuousTrace> {
    check_beta(beta)?;
    check_dims(f.dim(), &phase0.x, &phase0.y)?;
    if !(dt > 0.0 && horizon > 0.0 && dt.is_finite() && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt and T must be positive, got dt = {dt}, T = {horizon}"
        )));
    }
    if dt > horizon {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} exceeds T = {horizon}"
        )));
    }
    if system == System::Isehd && !gamma.has_derivative() {
        return Err(Error::MissingGammaDerivative);
    }
    let n = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let t_end = phase0.t + horizon;

    let mut trace = ContinuousTrace {
        system,
        states: Vec::with_capacity(n + 1),
        velocities: Vec::with_capacity(n + 1),
        energies: Vec::with_capacity(n + 1),
        diverged: false,
    };
    let push = |trace: &mut ContinuousTrace, s: PhaseState| {
        trace.velocities.push(velocity(system, &s, f, beta, gamma));
        trace.energies.push(energy(system, &s, f, beta, gamma));
        trace.states.push(s);
    };
    push(&mut trace, phase0.clone());

    let mut s = phase0.clone();
    for i in 0..n {
        let step = if i + 1 == n { t_end - s.t } else { dt };
        let mut next = rk4_step(system, &s, f, beta, gamma, step)?;
        if i + 1 == n {
            next.t = t_end;
        } else {
            next.t = phase0.t + (i + 1) as f64 * dt;
        }
        if !(is_finite(&next.x) && is_finite(&next.y)) {
            trace.diverged = true;
            break;
        }
        push(&mut trace, next.clone());
        s = next;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{double_well, quadratic};
    use nalgebra::{dvector, DMatrix, DVector};

    fn gamma(c: f64) -> GammaSchedule {
        GammaSchedule::constant(c).unwrap()
    }

    #[test]
    fn explicit_field_vanishes_at_equilibria() {
        let f = double_well();
        let (beta, c) = (0.2, 1.5);
        for x in [dvector![1.0, 0.0], dvector![0.0, 0.0], dvector![-1.0, 0.0]] {
            let s = PhaseState {
                t: 0.0,
                y: (1.0 - beta * c) * &x,
                x,
            };
            let (dx, dy) = isehd_vector_field(&s, &f, beta, &gamma(c)).unwrap();
            assert!(dx.norm() < 1e-15 && dy.norm() < 1e-15);
        }
    }

    #[test]
    fn implicit_field_on_diagonal() {
        let f = double_well();
        let x = dvector![0.5, -0.3];
        let s = PhaseState {
            t: 0.0,
            x: x.clone(),
            y: x.clone(),
        };
        let (dx, dy) = isihd_vector_field(&s, &f, 0.1, &gamma(1.0)).unwrap();
        assert_eq!(dx, DVector::zeros(2));
        assert_eq!(dy, -0.1 * f.grad(&x));
    }

    #[test]
    fn initial_phases() {
        let f = quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let x0 = dvector![0.0, 0.0];
        let v0 = DVector::zeros(2);
        let s = initial_phase(System::Isihd, &dvector![1.0, 2.0], &v0, &f, 0.3, &gamma(1.0)).unwrap();
        assert_eq!(s.y, dvector![1.0, 2.0]);
        let s = initial_phase(System::Isehd, &x0, &v0, &f, 0.3, &gamma(2.0)).unwrap();
        assert_eq!(s.y, (1.0 - 0.6) * &x0);
        assert!(initial_phase(System::Isehd, &x0, &v0, &f, 0.0, &gamma(2.0)).is_err());
    }

    #[test]
    fn missing_derivative_is_rejected() {
        let f = double_well();
        let g = GammaSchedule::custom(|_| 1.0, None, 1.0, 1.0).unwrap();
        let s = PhaseState {
            t: 0.0,
            x: dvector![0.1, 0.1],
            y: dvector![0.0, 0.0],
        };
        assert_eq!(
            isehd_vector_field(&s, &f, 0.1, &g).unwrap_err(),
            Error::MissingGammaDerivative
        );
        assert!(isihd_vector_field(&s, &f, 0.1, &g).is_ok());
    }

    #[test]
    fn equilibrium_start_is_constant() {
        let f = double_well();
        let x = dvector![1.0, 0.0];
        for system in [System::Isehd, System::Isihd] {
            let s0 = initial_phase(system, &x, &DVector::zeros(2), &f, 0.1, &gamma(1.0)).unwrap();
            let tr = integrate(system, &s0, &f, 0.1, &gamma(1.0), 0.01, 1.0).unwrap();
            assert_eq!(tr.states.len(), 101);
            assert!(tr.states.iter().all(|s| (&s.x - &x).norm() < 1e-13), "{system}");
            assert_eq!(tr.last().t, 1.0);
            assert!(tr.max_energy_increase() < 1e-15);
        }
    }

    #[test]
    fn bad_horizons() {
        let f = double_well();
        let s0 = PhaseState {
            t: 0.0,
            x: dvector![1.0, 0.0],
            y: dvector![1.0, 0.0],
        };
        assert!(integrate(System::Isihd, &s0, &f, 0.1, &gamma(1.0), 2.0, 1.0).is_err());
        let tr = integrate(System::Isihd, &s0, &f, 0.1, &gamma(1.0), 0.3, 1.0).unwrap();
        assert_eq!(tr.states.len(), 5);
        assert_eq!(tr.last().t, 1.0);
    }

    #[test]
    fn implicit_velocity_identity() {
        let f = double_well();
        let s0 = initial_phase(System::Isihd, &dvector![0.3, 0.8], &dvector![0.5, 0.0], &f, 0.2, &gamma(1.0))
            .unwrap();
        let tr = integrate(System::Isihd, &s0, &f, 0.2, &gamma(1.0), 0.01, 2.0).unwrap();
        for (s, v) in tr.states.iter().zip(&tr.velocities) {
            assert_eq!(*v, (&s.y - &s.x) / 0.2);
        }
        assert!((&tr.velocities[0] - dvector![0.5, 0.0]).norm() < 1e-15);
    }
}
