//! Smooth objectives and the point type the solvers iterate on.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

/// A point of `R^d`.
pub type Point = DVector<f64>;

/// Symmetric `d x d` matrix, used for Hessians.
pub type Matrix = DMatrix<f64>;

/// A twice differentiable function `f: R^d -> R`.
///
/// `hess` and `lipschitz` are optional; schemes only ever call `grad`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Point) -> f64;

    fn grad(&self, x: &Point) -> Point;

    fn hess(&self, _x: &Point) -> Option<Matrix> {
        None
    }

    /// Global Lipschitz constant of the gradient, when one is known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Point) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &Point) -> Point {
        (**self).grad(x)
    }
    fn hess(&self, x: &Point) -> Option<Matrix> {
        (**self).hess(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Point) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &Point) -> Point {
        (**self).grad(x)
    }
    fn hess(&self, x: &Point) -> Option<Matrix> {
        (**self).hess(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

/// Wraps an objective and counts gradient evaluations.
pub struct CountingObjective<F> {
    inner: F,
    grads: AtomicUsize,
}

impl<F: Objective> CountingObjective<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            grads: AtomicUsize::new(0),
        }
    }

    pub fn grad_count(&self) -> usize {
        self.grads.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.grads.store(0, Ordering::Relaxed);
    }
}

impl<F: Objective> Objective for CountingObjective<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &Point) -> f64 {
        self.inner.eval(x)
    }
    fn grad(&self, x: &Point) -> Point {
        self.grads.fetch_add(1, Ordering::Relaxed);
        self.inner.grad(x)
    }
    fn hess(&self, x: &Point) -> Option<Matrix> {
        self.inner.hess(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }
}

pub fn is_finite(x: &Point) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Checks that a Hessian is symmetric to within `1e-12` relative tolerance.
pub fn is_symmetric(m: &Matrix) -> bool {
    m.nrows() == m.ncols() && asymmetric_entry(m).is_none()
}

/// First entry `(i, j)` of a square matrix with `m_ij != m_ji` beyond `1e-12`
/// relative tolerance.
pub fn asymmetric_entry(m: &Matrix) -> Option<(usize, usize)> {
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let n = m.nrows().min(m.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Some((i, j));
            }
        }
    }
    None
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Attaches a (possibly estimated) gradient Lipschitz constant to an
/// objective that has none.
pub struct WithLipschitz<F> {
    inner: F,
    lipschitz: f64,
}

impl<F: Objective> WithLipschitz<F> {
    pub fn new(inner: F, lipschitz: f64) -> Self {
        Self { inner, lipschitz }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: Objective> Objective for WithLipschitz<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &Point) -> f64 {
        self.inner.eval(x)
    }
    fn grad(&self, x: &Point) -> Point {
        self.inner.grad(x)
    }
    fn hess(&self, x: &Point) -> Option<Matrix> {
        self.inner.hess(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}
