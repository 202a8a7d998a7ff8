//! Blur and forward-difference operators on images, with exact adjoints.
//!
//! Boundaries are Neumann (replicate-edge): the blur clamps indices into the
//! image, and forward differences are zero across the last column/row.

use crate::error::{Error, Result};
use crate::problems::image::Image;

/// Odd-sized, nonnegative correlation stencil whose entries sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd, got {size}"
            )));
        }
        if weights.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "kernel weights must be nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "kernel weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { size, weights })
    }

    /// Scales nonnegative weights so they sum to one.
    pub fn normalized(size: usize, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidParameter("kernel weights sum to zero".into()));
        }
        Self::new(size, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
        }
    }

    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be positive, got {sigma}"
            )));
        }
        let r = (size / 2) as f64;
        let mut w = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                let (dy, dx) = (a as f64 - r, b as f64 - r);
                w.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
            }
        }
        Self::normalized(size, w)
    }

    /// The default blur: 5x5 Gaussian, sigma 1.5.
    pub fn default_blur() -> Self {
        Self::gaussian(5, 1.5).expect("valid default kernel")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn radius(&self) -> isize {
        (self.size / 2) as isize
    }
}

#[inline]
fn clamp(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// `(A u)_{i,j} = sum_{a,b} k_{a,b} u_{clamp(i+a), clamp(j+b)}`
pub fn blur_apply(kernel: &Kernel, u: &Image) -> Image {
    let (nx, ny) = (u.width(), u.height());
    let r = kernel.radius();
    let mut out = Image::zeros(nx, ny);
    for i in 0..ny {
        for j in 0..nx {
            let mut acc = 0.0;
            for a in 0..kernel.size {
                let ii = clamp(i as isize + a as isize - r, ny);
                for b in 0..kernel.size {
                    let jj = clamp(j as isize + b as isize - r, nx);
                    acc += kernel.weights[a * kernel.size + b] * u.get(ii, jj);
                }
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Adjoint of [`blur_apply`]: scatters each pixel back through the clamped
/// stencil.
pub fn blur_adjoint(kernel: &Kernel, v: &Image) -> Image {
    let (nx, ny) = (v.width(), v.height());
    let r = kernel.radius();
    let mut out = Image::zeros(nx, ny);
    for i in 0..ny {
        for j in 0..nx {
            let vij = v.get(i, j);
            for a in 0..kernel.size {
                let ii = clamp(i as isize + a as isize - r, ny);
                for b in 0..kernel.size {
                    let jj = clamp(j as isize + b as isize - r, nx);
                    out.add(ii, jj, kernel.weights[a * kernel.size + b] * vij);
                }
            }
        }
    }
    out
}

/// Horizontal forward difference `u_{i,j+1} - u_{i,j}`; zero on the last column.
pub fn kx_apply(u: &Image) -> Image {
    let nx = u.width();
    Image::from_fn(nx, u.height(), |i, j| {
        if j + 1 < nx {
            u.get(i, j + 1) - u.get(i, j)
        } else {
            0.0
        }
    })
}

pub fn kx_adjoint(w: &Image) -> Image {
    let nx = w.width();
    Image::from_fn(nx, w.height(), |i, j| {
        let from_left = if j >= 1 { w.get(i, j - 1) } else { 0.0 };
        let own = if j + 1 < nx { w.get(i, j) } else { 0.0 };
        from_left - own
    })
}

/// Vertical forward difference `u_{i+1,j} - u_{i,j}`; zero on the last row.
pub fn ky_apply(u: &Image) -> Image {
    let ny = u.height();
    Image::from_fn(u.width(), ny, |i, j| {
        if i + 1 < ny {
            u.get(i + 1, j) - u.get(i, j)
        } else {
            0.0
        }
    })
}

pub fn ky_adjoint(w: &Image) -> Image {
    let ny = w.height();
    Image::from_fn(w.width(), ny, |i, j| {
        let from_above = if i >= 1 { w.get(i - 1, j) } else { 0.0 };
        let own = if i + 1 < ny { w.get(i, j) } else { 0.0 };
        from_above - own
    })
}

/// `|K|^2` by power iteration on `K^T K`, started from a fixed
/// non-symmetric pattern. Estimates from below.
pub fn operator_norm_squared(
    nx: usize,
    ny: usize,
    iterations: usize,
    apply: impl Fn(&Image) -> Image,
    adjoint: impl Fn(&Image) -> Image,
) -> f64 {
    let mut v = Image::from_fn(nx, ny, |i, j| {
        1.0 + ((i * 7 + j * 13) % 11) as f64 / 11.0 + if (i + j) % 2 == 0 { 0.5 } else { -0.5 }
    });
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let norm = v.norm_squared().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = v.map(|p| p / norm);
        let w = adjoint(&apply(&v));
        lambda = v.dot(&w);
        v = w;
    }
    lambda
}
