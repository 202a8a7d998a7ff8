use crate::error::{Error, Result};
use crate::objective::Point;

/// Gray-scale image, `nx` columns by `ny` rows, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    nx: usize,
    ny: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(nx: usize, ny: usize, pixels: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {nx}x{ny}"
            )));
        }
        if pixels.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                actual: pixels.len(),
            });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("image has non-finite pixels".into()));
        }
        Ok(Self { nx, ny, pixels })
    }

    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self::filled(nx, ny, 0.0)
    }

    pub fn filled(nx: usize, ny: usize, value: f64) -> Self {
        assert!(nx > 0 && ny > 0, "image dimensions must be positive");
        Self {
            nx,
            ny,
            pixels: vec![value; nx * ny],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Self::zeros(nx, ny);
        for i in 0..ny {
            for j in 0..nx {
                img.pixels[i * nx + j] = f(i, j);
            }
        }
        img
    }

    /// Number of columns.
    pub fn width(&self) -> usize {
        self.nx
    }

    /// Number of rows.
    pub fn height(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Pixel at row `i`, column `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.nx + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.pixels[i * self.nx + j] = v;
    }

    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        self.pixels[i * self.nx + j] += v;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub fn dot(&self, other: &Image) -> f64 {
        debug_assert!(self.same_shape(other));
        self.pixels.iter().zip(&other.pixels).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image {
            nx: self.nx,
            ny: self.ny,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Image {
        assert!(self.same_shape(other), "image shapes differ");
        Image {
            nx: self.nx,
            ny: self.ny,
            pixels: self
                .pixels
                .iter()
                .zip(&other.pixels)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Column-major flattening: pixel `(i, j)` goes to `j * ny + i`.
    pub fn to_point(&self) -> Point {
        let mut p = Point::zeros(self.len());
        for i in 0..self.ny {
            for j in 0..self.nx {
                p[j * self.ny + i] = self.get(i, j);
            }
        }
        p
    }

    /// Inverse of [`Image::to_point`].
    pub fn from_point(nx: usize, ny: usize, p: &Point) -> Result<Self> {
        if p.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                actual: p.len(),
            });
        }
        let mut img = Image::zeros(nx, ny);
        for i in 0..ny {
            for j in 0..nx {
                img.set(i, j, p[j * ny + i]);
            }
        }
        Ok(img)
    }

    pub fn clamp01(&self) -> Image {
        self.map(|p| p.clamp(0.0, 1.0))
    }
}

/// Piecewise-constant test scene: dark background, a bright rectangle, a
/// mid-gray disc and a small white square. Scales with `n`.
pub fn phantom(n: usize) -> Image {
    let nf = n as f64;
    Image::from_fn(n, n, |i, j| {
        let (y, x) = ((i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf);
        let in_rect = (0.15..0.55).contains(&x) && (0.2..0.75).contains(&y);
        let in_disc = (x - 0.68).powi(2) + (y - 0.4).powi(2) < 0.2f64.powi(2);
        let in_square = (0.62..0.8).contains(&x) && (0.72..0.9).contains(&y);
        if in_square {
            1.0
        } else if in_disc {
            0.5
        } else if in_rect {
            0.8
        } else {
            0.1
        }
    })
}
