//! Discrete Lyapunov sequences `V_k = f(x_k) + (W/2) |x_k - x_{k-1}|^2` and
//! the decrease inequality `V_{k+1} <= V_k - delta |x_{k+1} - x_k|^2`.

use crate::error::{Error, Result};
use crate::params::validate_convergence_condition;
use crate::solvers::Method;
use crate::trace::Trace;

/// Relative slack allowed on the decrease inequality, scaled by `max(1, |V_0|)`.
pub const LYAPUNOV_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    /// Kinetic weight `W`.
    pub weight: f64,
    /// Guaranteed decrease `delta = 1/s - L/2 - W`, with `s` the largest
    /// gradient step.
    pub delta: f64,
}

/// Constants for `method` with gradient Lipschitz constant `lipschitz`. The
/// free-coefficient schemes take suprema over `k = 1..=horizon`.
pub fn lyapunov_constants(method: &Method, lipschitz: f64, horizon: usize) -> LyapunovConstants {
    let l = lipschitz;
    match method {
        Method::Isehd(p) | Method::Isihd(p) => {
            let (h, beta, c) = (p.h, p.beta, p.gamma.lower());
            LyapunovConstants {
                weight: 1.0 / (h * h) + beta * l / h,
                // 1/s - L/2 - W with s = h^2 / (1 + c h), simplified.
                delta: (c - beta * l - 0.5 * h * l) / h,
            }
        }
        Method::Hbf(p) => {
            let (h, c) = (p.h, p.gamma.lower());
            LyapunovConstants {
                weight: 1.0 / (h * h),
                delta: (c - 0.5 * h * l) / h,
            }
        }
        Method::Gd(p) => {
            let (h, c) = (p.h, p.gamma.lower());
            LyapunovConstants {
                weight: 0.0,
                delta: (1.0 + c * h) / (h * h) - 0.5 * l,
            }
        }
        Method::IsehdGeneral(coeffs, _) => {
            let (_, s_bar, w) = coeffs.sup_over(horizon, |c| (c.alpha + c.beta * l) / c.s);
            LyapunovConstants {
                weight: w,
                delta: 1.0 / s_bar - 0.5 * l - w,
            }
        }
        Method::IsihdGeneral(coeffs, _) => {
            let (_, s_bar, w) = coeffs.sup_over(horizon, |c| c.beta * l + c.alpha / c.s);
            LyapunovConstants {
                weight: w,
                delta: 1.0 / s_bar - 0.5 * l - w,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub values: Vec<f64>,
    pub weight: f64,
    pub delta: f64,
    pub tolerance: f64,
    /// `(k, gap)` with `gap = V_{k+1} - (V_k - delta |v_{k+1}|^2) > tolerance`,
    /// `k` being the record index of `V_k`.
    pub violations: Vec<(usize, f64)>,
}

impl LyapunovReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest gap over the whole sequence (negative when the inequality
    /// holds with room to spare everywhere).
    pub fn max_gap(&self, trace: &Trace) -> f64 {
        trace
            .records
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, v)| v[1] - v[0] + self.delta * r[1].step_norm * r[1].step_norm)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Recomputes `V_k` along `trace` and checks the decrease inequality between
/// consecutive records.
///
/// Fails when `delta <= 0`, i.e. when the step-size condition of the scheme
/// does not hold; the error names the violated condition.
pub fn lyapunov_sequence(trace: &Trace, method: &Method, lipschitz: f64) -> Result<LyapunovReport> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::MissingLipschitz);
    }
    if let Method::Isehd(p) | Method::Isihd(p) = method {
        let verdict = validate_convergence_condition(p, Some(lipschitz))?;
        if !verdict.satisfied {
            return Err(Error::ConditionViolated(verdict.message));
        }
    }
    let LyapunovConstants { weight, delta } =
        lyapunov_constants(method, lipschitz, method.stop_rule().max_iter);
    if !(delta > 0.0) {
        return Err(Error::ConditionViolated(format!(
            "Lyapunov decrease constant delta = {delta} is not positive"
        )));
    }
    let values: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.f_value + 0.5 * weight * r.step_norm * r.step_norm)
        .collect();
    let tolerance = LYAPUNOV_TOLERANCE * values.first().map_or(1.0, |v| v.abs().max(1.0));
    let violations = trace
        .records
        .windows(2)
        .zip(values.windows(2))
        .enumerate()
        .filter_map(|(k, (r, v))| {
            let gap = v[1] - (v[0] - delta * r[1].step_norm * r[1].step_norm);
            (gap > tolerance).then_some((k, gap))
        })
        .collect();
    Ok(LyapunovReport {
        values,
        weight,
        delta,
        tolerance,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Objective, Point};
    use crate::params::{GammaSchedule, SolverParams};
    use crate::problems::Quadratic;
    use crate::solvers::{run, GeneralCoefficients, Scheme, StopRule};
    use nalgebra::dvector;

    fn params(h: f64, beta: f64, c: f64) -> SolverParams {
        SolverParams::new(h, beta, GammaSchedule::constant(c).unwrap()).unwrap()
    }

    struct Flat;
    impl Objective for Flat {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _: &Point) -> f64 {
            -3.0
        }
        fn grad(&self, _: &Point) -> Point {
            Point::zeros(2)
        }
        fn lipschitz(&self) -> Option<f64> {
            Some(1.0)
        }
    }

    #[test]
    fn constant_objective_has_constant_sequence() {
        let m = Method::new(Scheme::Isehd, params(0.1, 0.1, 1.0).with_max_iter(10));
        let x = dvector![1.0, 2.0];
        let t = run(&m, &Flat, &x, &x).unwrap();
        let r = lyapunov_sequence(&t, &m, 1.0).unwrap();
        assert!(r.values.iter().all(|&v| v == -3.0));
        assert!(r.holds());
    }

    #[test]
    fn decrease_on_strongly_convex_quadratic() {
        let f = Quadratic::random_spd(6, 0.1, 5.0, 11).unwrap();
        let l = f.lipschitz().unwrap();
        let c = 2.0;
        let p = params(0.5 * c / l, 0.25 * c / l, c).with_max_iter(2000);
        let x0 = Point::from_element(6, 3.0);
        for scheme in Scheme::STANDARD {
            let m = Method::new(scheme, p.clone());
            let t = run(&m, &f, &x0, &x0).unwrap();
            let r = lyapunov_sequence(&t, &m, l).unwrap();
            assert!(r.holds(), "{scheme}: {:?}", &r.violations[..r.violations.len().min(3)]);
            // run records the same sequence
            for (rec, v) in t.records.iter().zip(&r.values) {
                assert!((rec.lyapunov - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn refuses_when_condition_fails() {
        let f = Quadratic::random_spd(3, 1.0, 10.0, 1).unwrap();
        let m = Method::new(Scheme::Isihd, params(0.1, 0.5, 3.0).with_max_iter(5));
        let x = Point::from_element(3, 1.0);
        let t = run(&m, &f, &x, &x).unwrap();
        match lyapunov_sequence(&t, &m, 10.0) {
            Err(Error::ConditionViolated(msg)) => assert!(msg.contains("beta + h/2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn general_constants_reduce_to_standard() {
        let p = params(0.01, 0.02, 3.0);
        let l = 50.0;
        let a = lyapunov_constants(&Method::new(Scheme::Isehd, p.clone()), l, 100);
        let stop = StopRule {
            max_iter: 100,
            residual_tol: 0.0,
        };
        let b = lyapunov_constants(
            &Method::IsehdGeneral(GeneralCoefficients::explicit_from(&p), stop),
            l,
            100,
        );
        assert!((a.weight - b.weight).abs() < 1e-9 * a.weight);
        assert!((a.delta - b.delta).abs() < 1e-8 * a.weight);
        let c = lyapunov_constants(
            &Method::IsihdGeneral(GeneralCoefficients::implicit_from(&p), stop),
            l,
            100,
        );
        assert!((a.weight - c.weight).abs() < 1e-9 * a.weight);
    }

    #[test]
    fn constant_general_coefficients_decrease() {
        // alpha + beta L + s L / 2 < 1 with L = 4
        let f = Quadratic::random_spd(4, 0.5, 4.0, 2).unwrap();
        let (alpha, beta, s) = (0.5, 0.02, 0.1);
        assert!(alpha + beta * 4.0 + s * 2.0 < 1.0);
        let stop = StopRule {
            max_iter: 500,
            residual_tol: 0.0,
        };
        let m = Method::IsehdGeneral(GeneralCoefficients::constant(alpha, beta, s), stop);
        let x = Point::from_element(4, -2.0);
        let t = run(&m, &f, &x, &x).unwrap();
        assert!(lyapunov_sequence(&t, &m, 4.0).unwrap().holds());
        // alpha + s L (beta + 1/2) < 1
        let m = Method::IsihdGeneral(GeneralCoefficients::constant(alpha, 0.1, s), stop);
        let t = run(&m, &f, &x, &x).unwrap();
        assert!(lyapunov_sequence(&t, &m, 4.0).unwrap().holds());
    }
}
