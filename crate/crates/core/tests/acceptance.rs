//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the verdict lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hessdamp::analysis::{
    classify_equilibrium_continuous, classify_fixed_point_discrete, distances_to,
    estimate_rate, lyapunov_sequence, montecarlo_avoidance, reference_limit, InitBox, RateModel,
};
use hessdamp::dynamics::{initial_phase, integrate, System};
use hessdamp::problems::operators::{
    blur_adjoint, blur_apply, kx_adjoint, kx_apply, ky_adjoint, ky_apply, Kernel,
};
use hessdamp::problems::{
    deblur_objective, double_well, gradient_check, phantom, quadratic, random_points, rosenbrock,
    synthesize_observation, DeblurProblem, Image, Quadratic,
};
use hessdamp::{
    coefficients_at, run, validate_convergence_condition, validate_saddle_condition,
    GammaSchedule, Matrix, Method, Objective, Point, Scheme, SolverParams, Trace,
};
use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn params(h: f64, beta: f64, gamma: f64) -> SolverParams {
    SolverParams::new(h, beta, GammaSchedule::constant(gamma).unwrap()).unwrap()
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(budget: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= budget {
        Ok(t)
    } else {
        Err(format!("runtime {t:.2?} exceeds {budget:.0?}"))
    }
}

/// d = 10 strongly convex quadratic with eigenvalues in [0.5, 10].
fn test_quadratic() -> Quadratic {
    Quadratic::random_spd(10, 0.5, 10.0, 20_240_601).unwrap()
}

fn lyapunov_decrease() -> Outcome {
    let start = Instant::now();
    let f = test_quadratic();
    let l = f.lipschitz().unwrap();
    let c = 3.0;
    let p = params(0.5 * c / l, 0.25 * c / l, c).with_max_iter(10_000);
    let verdict = validate_convergence_condition(&p, Some(l)).map_err(|e| e.to_string())?;
    if !verdict.satisfied {
        return Err(verdict.message);
    }
    let x0 = Point::from_element(10, 5.0);
    let mut details = Vec::new();
    for scheme in [Scheme::Isehd, Scheme::Isihd] {
        let m = Method::new(scheme, p.clone());
        let t = run(&m, &f, &x0, &x0).map_err(|e| e.to_string())?;
        let r = lyapunov_sequence(&t, &m, l).map_err(|e| e.to_string())?;
        if t.iterations() != 10_000 {
            return Err(format!("{scheme}: stopped after {} iterations", t.iterations()));
        }
        if !r.holds() {
            return Err(format!("{scheme}: {} violations, first {:?}", r.violations.len(), r.violations[0]));
        }
        details.push(format!("{scheme} 0/10000 violations"));
    }
    let t = within(Duration::from_secs(1), start)?;
    Ok(format!("{} in {t:.2?}", details.join(", ")))
}

fn beta_zero_collapse() -> Outcome {
    let p = params(1e-3, 0.0, 3.0).with_max_iter(1000);
    let q = test_quadratic();
    let problems: [(&str, &dyn Objective, Point); 2] = [
        ("rosenbrock", &rosenbrock(), dvector![-1.5, 0.0]),
        ("quadratic", &q, Point::from_element(10, 1.0)),
    ];
    for (name, f, x0) in problems {
        let x1 = &x0 + Point::from_element(x0.len(), 1e-3);
        let traces: Vec<Trace> = [Scheme::Isehd, Scheme::Isihd, Scheme::Hbf]
            .into_iter()
            .map(|s| run(&Method::new(s, p.clone()), f, &x0, &x1).unwrap())
            .collect();
        if !(traces[0].bit_identical(&traces[2]) && traces[1].bit_identical(&traces[2])) {
            return Err(format!("{name}: traces differ"));
        }
        if traces[0].records.len() != 1001 {
            return Err(format!("{name}: {} records", traces[0].records.len()));
        }
    }
    Ok("ISEHD = ISIHD = HBF bit for bit on rosenbrock and quadratic, 1000 iterations".into())
}

fn gradient_oracles() -> Outcome {
    let mut worst = Vec::new();
    let q = test_quadratic();
    let checks: [(&str, &dyn Objective, Vec<Point>, f64); 3] = [
        ("rosenbrock", &rosenbrock(), random_points(2, 25, -2.0, 2.0, 1), 1e-6),
        ("double_well", &double_well(), random_points(2, 25, -2.0, 2.0, 2), 1e-6),
        ("quadratic", &q, random_points(10, 25, -3.0, 3.0, 3), 1e-6),
    ];
    for (name, f, pts, step) in checks {
        worst.push((name, gradient_check(f, &pts, step).max_rel_error));
    }
    let u = phantom(8);
    let k = Kernel::default_blur();
    let b = synthesize_observation(&u, &k, 0.01, 4);
    let f = deblur_objective(DeblurProblem::new(k, b, 5e-5, 1e-3).unwrap());
    let pts = random_points(64, 25, 0.0, 1.0, 5);
    worst.push(("deblur 8x8", gradient_check(&f, &pts, 1e-5).max_rel_error));
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst
        .iter()
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(max < 1e-4, format!("max relative error: {detail}"))
}

fn linear_rate() -> Outcome {
    let f = test_quadratic();
    let l = f.lipschitz().unwrap();
    let c = 3.0;
    let p = params(0.5 * c / l, 0.25 * c / l, c).with_max_iter(300);
    let x0 = Point::from_element(10, 5.0);
    let mut details = Vec::new();
    let mut ok = true;
    for scheme in [Scheme::Isehd, Scheme::Isihd] {
        let m = Method::new(scheme, p.clone());
        let x_inf = reference_limit(&m, &f, &x0, &x0).map_err(|e| e.to_string())?;
        let t = run(&m, &f, &x0, &x0).map_err(|e| e.to_string())?;
        let r = estimate_rate(&distances_to(&t, &x_inf), RateModel::Linear)
            .map_err(|e| e.to_string())?;
        let rho = r.rho.unwrap();
        ok &= rho < 1.0 && r.r_squared > 0.99;
        details.push(format!("{scheme} rho = {rho:.4}, r^2 = {:.5}", r.r_squared));
    }
    check(ok, details.join(", "))
}

fn saddle_instability() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = 0;
    let mut drawn = 0;
    let mut min_margin = f64::INFINITY;
    while drawn < 1000 {
        let l = 10f64.powf(rng.random_range(0.0..2.0));
        let c = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta = rng.random_range(0.0..1.0) * c / l;
        if beta <= 0.0 {
            continue;
        }
        let bound = f64::min(2.0 * (c / l - beta), 1.0 / (l * beta));
        let h = rng.random_range(0.0..1.0) * bound;
        let Ok(p) = SolverParams::new(h, beta, GammaSchedule::constant(c).unwrap()) else {
            continue;
        };
        if !validate_saddle_condition(&p, Some(l)).unwrap().satisfied {
            continue;
        }
        drawn += 1;
        let eta = -rng.random_range(0.0..1.0) * l;
        let others: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0) * l).collect();
        let eigs: Vec<f64> = std::iter::once(eta).chain(others).collect();
        let k = coefficients_at(&p, 0);
        let explicit = classify_fixed_point_discrete(Scheme::Isehd, &eigs, k.alpha, k.beta, k.s);
        let implicit = classify_fixed_point_discrete(Scheme::Isihd, &eigs, k.alpha, beta / h, k.s);
        let continuous = classify_equilibrium_continuous(&eigs, c, beta);
        for r in [explicit, implicit, continuous] {
            match r {
                Ok(r) if r.is_unstable => min_margin = min_margin.min(r.max_margin()),
                _ => failures += 1,
            }
        }
    }
    let t = within(Duration::from_secs(1), start)?;
    check(
        failures == 0,
        format!(
            "{failures} failures over 1000 draws x 3 classifiers, smallest unstable margin {min_margin:.2e}, {t:.2?}"
        ),
    )
}

fn montecarlo() -> Outcome {
    let start = Instant::now();
    // On [-2.5, 2.5]^2 the Hessian is bounded by 3 * 2.5^2 - 1 < 18.
    let l = 18.0;
    let p = params(0.05, 0.02, 1.0).with_max_iter(5000);
    let v = validate_saddle_condition(&p, Some(l)).map_err(|e| e.to_string())?;
    if !v.satisfied {
        return Err(v.message);
    }
    let init = InitBox::cube(2, 2.0).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for scheme in [Scheme::Isehd, Scheme::Isihd] {
        let r = montecarlo_avoidance(&Method::new(scheme, p.clone()), &double_well(), &init, 1000, 2024, 1e-6, true)
            .map_err(|e| e.to_string())?;
        ok &= r.n_to_strict_saddle == 0;
        details.push(format!(
            "{scheme} min/saddle/degenerate/nonconverged = {}/{}/{}/{}",
            r.n_to_min, r.n_to_strict_saddle, r.n_degenerate, r.n_nonconverged
        ));
    }
    let t = within(Duration::from_secs(30), start)?;
    check(ok, format!("{}, {t:.2?}", details.join(", ")))
}

/// Sign changes of the y-component of `x_k - x_{k-1}` over the last `last`
/// iterations.
fn oscillations(t: &Trace, last: usize) -> usize {
    let n = t.records.len();
    let dy: Vec<f64> = t.records[n.saturating_sub(last + 1)..]
        .windows(2)
        .map(|w| w[1].x[1] - w[0].x[1])
        .filter(|d| *d != 0.0)
        .collect();
    dy.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

fn rosenbrock_reproduction() -> Outcome {
    let start = Instant::now();
    let p = params(1e-3, 0.04, 3.0).with_max_iter(20_000);
    let x0 = dvector![-1.5, 0.0];
    let f = rosenbrock();
    let mut res = Vec::new();
    let mut osc = Vec::new();
    for s in Scheme::STANDARD {
        let t = run(&Method::new(s, p.clone()), &f, &x0, &x0).map_err(|e| e.to_string())?;
        if t.diverged {
            return Err(format!("{s} diverged"));
        }
        res.push(t.last().residual);
        osc.push((oscillations(&t, 5000), oscillations(&t, 20_000)));
    }
    let (isehd, isihd, gd, hbf) = (0, 1, 2, 3);
    let a = res[isehd] * 10.0 <= res[gd] && res[isihd] * 10.0 <= res[gd];
    let b = osc[isehd].0 < osc[hbf].0 && osc[isihd].0 < osc[hbf].0;
    let t = within(Duration::from_secs(5), start)?;
    check(
        a && b,
        format!(
            "(a) {} residuals isehd {:.2e}, isihd {:.2e}, gd {:.2e}; \
             (b) {} sign changes over the last 5000 iterations isehd {}, isihd {}, hbf {} \
             (whole run: {}, {}, {}); {t:.2?}",
            if a { "pass" } else { "FAIL" },
            res[isehd],
            res[isihd],
            res[gd],
            if b { "pass" } else { "FAIL" },
            osc[isehd].0,
            osc[isihd].0,
            osc[hbf].0,
            osc[isehd].1,
            osc[isihd].1,
            osc[hbf].1
        ),
    )
}

fn deblur_reproduction() -> Outcome {
    let start = Instant::now();
    let u = phantom(64);
    let k = Kernel::default_blur();
    let b = synthesize_observation(&u, &k, 0.01, 42);
    let f = deblur_objective(DeblurProblem::new(k, b.clone(), 5e-5, 1e-3).unwrap());
    let p = params(0.5, 1.3, 0.25).with_max_iter(250);
    let x0 = b.to_point();
    let mut traces = Vec::new();
    for s in [Scheme::Isehd, Scheme::Isihd, Scheme::Gd] {
        let t = run(&Method::new(s, p.clone()), &f, &x0, &x0).map_err(|e| e.to_string())?;
        if t.diverged || t.records.len() != 251 {
            return Err(format!("{s}: diverged or stopped early"));
        }
        traces.push(t);
    }
    let gd = &traces[2];
    let mut bad = Vec::new();
    for (name, t) in [("isehd", &traces[0]), ("isihd", &traces[1])] {
        if let Some(k) = (50..=250).find(|&k| t.records[k].residual >= gd.records[k].residual) {
            bad.push(format!("{name} residual not below gd at k = {k}"));
        }
        if t.last().f_value >= gd.last().f_value {
            bad.push(format!("{name} final f not below gd"));
        }
    }
    let t = within(Duration::from_secs(60), start)?;
    let detail = format!(
        "final f isehd {:.4e}, isihd {:.4e}, gd {:.4e}; final residual isehd {:.2e}, isihd {:.2e}, gd {:.2e}; {t:.2?}",
        traces[0].last().f_value,
        traces[1].last().f_value,
        gd.last().f_value,
        traces[0].last().residual,
        traces[1].last().residual,
        gd.last().residual
    );
    if bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", bad.join("; ")))
    }
}

fn ode_energy() -> Outcome {
    let f = Quadratic::random_spd(4, 0.5, 4.0, 9).unwrap();
    let gamma = GammaSchedule::constant(1.0).unwrap();
    let (beta, dt, horizon): (f64, f64, f64) = (0.1, 1e-3, 20.0);
    let tol = 10.0 * dt.powi(4);
    let x0 = Point::from_element(4, 1.0);
    let v0 = Point::from_element(4, -0.5);
    let mut details = Vec::new();
    for system in [System::Isehd, System::Isihd] {
        let s0 = initial_phase(system, &x0, &v0, &f, beta, &gamma).map_err(|e| e.to_string())?;
        let tr = integrate(system, &s0, &f, beta, &gamma, dt, horizon).map_err(|e| e.to_string())?;
        let inc = tr.max_energy_increase();
        if tr.diverged || inc > tol {
            return Err(format!("{system}: max energy increment {inc:.2e} > {tol:.0e}"));
        }
        details.push(format!("{system} max increment {inc:.1e}"));
    }
    let ratio = richardson_ratio()?;
    check(
        (12.0..=20.0).contains(&ratio),
        format!("{} (tol {tol:.0e}); Richardson ratio {ratio:.2}", details.join(", ")),
    )
}

/// Endpoint error ratio between steps `dt` and `dt/2` on the linear implicit
/// system, against the matrix exponential.
fn richardson_ratio() -> Result<f64, String> {
    let a = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let f = quadratic(a.clone(), Point::zeros(2)).unwrap();
    let (beta, c) = (0.1, 1.0);
    let gamma = GammaSchedule::constant(c).unwrap();
    let s0 = initial_phase(System::Isihd, &dvector![1.0, -1.0], &dvector![0.0, 0.5], &f, beta, &gamma)
        .map_err(|e| e.to_string())?;
    let m = phase_matrix(&a, beta, c);
    let z0 = Point::from_iterator(4, s0.x.iter().chain(s0.y.iter()).copied());
    let exact = (m * 1.0).exp() * z0;
    let err = |dt: f64| {
        let tr = integrate(System::Isihd, &s0, &f, beta, &gamma, dt, 1.0).unwrap();
        let e = tr.last();
        let z = Point::from_iterator(4, e.x.iter().chain(e.y.iter()).copied());
        (z - &exact).norm()
    };
    Ok(err(0.05) / err(0.025))
}

/// `d/dt (x, y) = M (x, y)` for the implicit system on `f = x^T A x / 2`.
fn phase_matrix(a: &Matrix, beta: f64, c: f64) -> Matrix {
    let d = a.nrows();
    let id = Matrix::identity(d, d);
    let k = 1.0 / beta - c;
    let mut m = Matrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&(-&id / beta));
    m.view_mut((0, d), (d, d)).copy_from(&(&id / beta));
    m.view_mut((d, 0), (d, d)).copy_from(&(-k * &id));
    m.view_mut((d, d), (d, d)).copy_from(&(k * &id - beta * a));
    m
}

type ImageOp<'a> = Box<dyn Fn(&Image) -> Image + 'a>;

fn adjoints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rand_image = |rng: &mut ChaCha8Rng| Image::from_fn(16, 16, |_, _| rng.random_range(-1.0..1.0));
    let k = Kernel::default_blur();
    let ops: [(&str, ImageOp, ImageOp); 3] = [
        ("A", Box::new(|u| blur_apply(&k, u)), Box::new(|v| blur_adjoint(&k, v))),
        ("Kx", Box::new(kx_apply), Box::new(kx_adjoint)),
        ("Ky", Box::new(ky_apply), Box::new(ky_adjoint)),
    ];
    let mut worst = Vec::new();
    for (name, apply, adjoint) in &ops {
        let mut max = 0.0f64;
        for _ in 0..100 {
            let u = rand_image(&mut rng);
            let v = rand_image(&mut rng);
            let au = apply(&u);
            let lhs = au.dot(&v);
            let rhs = u.dot(&adjoint(&v));
            let scale = au.norm_squared().sqrt() * v.norm_squared().sqrt();
            max = max.max((lhs - rhs).abs() / scale);
        }
        worst.push((*name, max));
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst
        .iter()
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(max < 1e-10, format!("max relative gap over 100 trials: {detail}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Lyapunov decrease", lyapunov_decrease),
        ("beta = 0 collapse", beta_zero_collapse),
        ("gradient oracles", gradient_oracles),
        ("linear rate on quadratic", linear_rate),
        ("saddle instability", saddle_instability),
        ("Monte-Carlo saddle avoidance", montecarlo),
        ("Rosenbrock reproduction", rosenbrock_reproduction),
        ("deblurring reproduction", deblur_reproduction),
        ("ODE energy decay and RK4 order", ode_energy),
        ("operator adjoints", adjoints),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
