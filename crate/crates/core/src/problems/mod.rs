//! Built-in objectives: Rosenbrock, quadratics, a double-well saddle testbed
//! and image deblurring.

pub mod deblur;
pub mod image;
pub mod operators;
pub mod pgm;

use nalgebra::{dvector, dmatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::{asymmetric_entry, Matrix, Objective, Point};

pub use deblur::{deblur_objective, synthesize_observation, DeblurObjective, DeblurProblem};
pub use image::{phantom, Image};
pub use operators::{
    blur_adjoint, blur_apply, kx_adjoint, kx_apply, ky_adjoint, ky_apply, Kernel,
};
pub use pgm::{pgm_read, pgm_write};

/// `f(x, y) = (1 - x)^2 + 100 (y - x^2)^2`
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

pub fn rosenbrock() -> Rosenbrock {
    Rosenbrock
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, p: &Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
    }

    fn grad(&self, p: &Point) -> Point {
        let (x, y) = (p[0], p[1]);
        let r = y - x * x;
        dvector![-2.0 * (1.0 - x) - 400.0 * x * r, 200.0 * r]
    }

    fn hess(&self, p: &Point) -> Option<Matrix> {
        let (x, y) = (p[0], p[1]);
        Some(dmatrix![
            2.0 - 400.0 * (y - 3.0 * x * x), -400.0 * x;
            -400.0 * x, 200.0
        ])
    }
}

/// `f(x) = 1/2 x^T A x - b^T x`
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: Matrix,
    b: Point,
    lipschitz: f64,
}

pub fn quadratic(a: Matrix, b: Point) -> Result<Quadratic> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    if let Some((i, j)) = asymmetric_entry(&a) {
        return Err(Error::Asymmetric(i, j));
    }
    let lipschitz = a
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(Quadratic { a, b, lipschitz })
}

impl Quadratic {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn linear_term(&self) -> &Point {
        &self.b
    }

    /// Random symmetric positive definite `A` with eigenvalues spread over
    /// `[lambda_min, lambda_max]` (endpoints included) and a random `b`.
    pub fn random_spd(d: usize, lambda_min: f64, lambda_max: f64, seed: u64) -> Result<Self> {
        if d == 0 || !(lambda_min > 0.0 && lambda_max >= lambda_min) {
            return Err(Error::InvalidParameter(format!(
                "need d >= 1 and 0 < lambda_min <= lambda_max, got d = {d}, [{lambda_min}, {lambda_max}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(d, d, |_, _| rng.random::<f64>() - 0.5);
        let q = m.qr().q();
        let eigs = Point::from_fn(d, |i, _| {
            if d == 1 {
                lambda_max
            } else {
                lambda_min + (lambda_max - lambda_min) * i as f64 / (d - 1) as f64
            }
        });
        let a = &q * Matrix::from_diagonal(&eigs) * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let b = Point::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        quadratic(a, b)
    }

    /// `A^{-1} b`, when `A` is invertible.
    pub fn minimizer(&self) -> Option<Point> {
        self.a.clone().lu().solve(&self.b)
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &Point) -> f64 {
        0.5 * x.dot(&(&self.a * x)) - self.b.dot(x)
    }

    fn grad(&self, x: &Point) -> Point {
        &self.a * x - &self.b
    }

    fn hess(&self, _: &Point) -> Option<Matrix> {
        Some(self.a.clone())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `f(x, y) = x^4/4 - x^2/2 + y^2/2`: minima at `(+-1, 0)`, strict saddle at
/// the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleWell;

pub fn double_well() -> DoubleWell {
    DoubleWell
}

impl DoubleWell {
    pub fn critical_points() -> [Point; 3] {
        [dvector![-1.0, 0.0], dvector![0.0, 0.0], dvector![1.0, 0.0]]
    }
}

impl Objective for DoubleWell {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, p: &Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        0.25 * x.powi(4) - 0.5 * x * x + 0.5 * y * y
    }

    fn grad(&self, p: &Point) -> Point {
        let (x, y) = (p[0], p[1]);
        dvector![x * x * x - x, y]
    }

    fn hess(&self, p: &Point) -> Option<Matrix> {
        let x = p[0];
        Some(dmatrix![3.0 * x * x - 1.0, 0.0; 0.0, 1.0])
    }
}

/// Worst relative error between the analytic gradient and central finite
/// differences over a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_point: usize,
    pub n_points: usize,
}

/// Central differences with step `step` in each coordinate.
pub fn finite_difference_gradient<F: Objective + ?Sized>(f: &F, x: &Point, step: f64) -> Point {
    let mut g = Point::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + step;
        let fp = f.eval(&xp);
        xp[i] = xi - step;
        let fm = f.eval(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

/// `|g - g_fd| / max(|g|, |g_fd|, floor)`, the floor guarding against
/// division by a vanishing gradient.
pub fn relative_gradient_error(analytic: &Point, numeric: &Point, floor: f64) -> f64 {
    let scale = analytic.norm().max(numeric.norm()).max(floor);
    (analytic - numeric).norm() / scale
}

pub fn gradient_check<F: Objective + ?Sized>(f: &F, points: &[Point], step: f64) -> GradCheck {
    let mut worst = (0.0f64, 0usize);
    for (i, x) in points.iter().enumerate() {
        let err = relative_gradient_error(&f.grad(x), &finite_difference_gradient(f, x, step), 1e-8);
        if err > worst.0 || err.is_nan() {
            worst = (err, i);
        }
    }
    GradCheck {
        max_rel_error: worst.0,
        worst_point: worst.1,
        n_points: points.len(),
    }
}

/// `n` points drawn uniformly from `[lower, upper]^d`.
pub fn random_points(d: usize, n: usize, lower: f64, upper: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point::from_fn(d, |_, _| lower + (upper - lower) * rng.random::<f64>()))
        .collect()
}
