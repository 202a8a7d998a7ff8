//! Deblurring with a nonconvex log-penalty on image gradients:
//!
//! `f(u) = 1/2 |A u - b|^2 + mu/2 sum_{i,j} log(rho + (Kx u)_{ij}^2 + (Ky u)_{ij}^2)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::objective::{Objective, Point};
use crate::problems::image::Image;
use crate::problems::operators::{
    blur_adjoint, blur_apply, kx_adjoint, kx_apply, ky_adjoint, ky_apply, operator_norm_squared,
    Kernel,
};

pub const DEFAULT_MU: f64 = 5e-5;
pub const DEFAULT_RHO: f64 = 1e-3;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

const POWER_ITERATIONS: usize = 100;

#[derive(Debug, Clone)]
pub struct DeblurProblem {
    pub kernel: Kernel,
    /// Observation.
    pub b: Image,
    pub mu: f64,
    pub rho: f64,
}

impl DeblurProblem {
    pub fn new(kernel: Kernel, b: Image, mu: f64, rho: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu and rho must be positive, got mu = {mu}, rho = {rho}"
            )));
        }
        Ok(Self { kernel, b, mu, rho })
    }
}

/// [`DeblurProblem`] as an objective over column-major flattened images.
#[derive(Debug, Clone)]
pub struct DeblurObjective {
    problem: DeblurProblem,
    lipschitz: f64,
}

pub fn deblur_objective(problem: DeblurProblem) -> DeblurObjective {
    let (nx, ny) = (problem.b.width(), problem.b.height());
    let kernel = &problem.kernel;
    let a2 = operator_norm_squared(
        nx,
        ny,
        POWER_ITERATIONS,
        |u| blur_apply(kernel, u),
        |v| blur_adjoint(kernel, v),
    );
    let kx2 = operator_norm_squared(nx, ny, POWER_ITERATIONS, kx_apply, kx_adjoint);
    let ky2 = operator_norm_squared(nx, ny, POWER_ITERATIONS, ky_apply, ky_adjoint);
    let lipschitz = a2 + 2.0 * problem.mu / problem.rho * (kx2 + ky2);
    DeblurObjective { problem, lipschitz }
}

impl DeblurObjective {
    pub fn problem(&self) -> &DeblurProblem {
        &self.problem
    }

    pub fn image(&self, p: &Point) -> Image {
        Image::from_point(self.problem.b.width(), self.problem.b.height(), p)
            .expect("point dimension matches the problem")
    }

    pub fn eval_image(&self, u: &Image) -> f64 {
        let p = &self.problem;
        let residual = blur_apply(&p.kernel, u).zip_map(&p.b, |a, b| a - b);
        let (gx, gy) = (kx_apply(u), ky_apply(u));
        let penalty: f64 = gx
            .pixels()
            .iter()
            .zip(gy.pixels())
            .map(|(x, y)| (p.rho + x * x + y * y).ln())
            .sum();
        0.5 * residual.norm_squared() + 0.5 * p.mu * penalty
    }

    /// `A^T (A u - b) + mu [Kx^T (Kx u / m) + Ky^T (Ky u / m)]` with
    /// `m = rho + (Kx u)^2 + (Ky u)^2`.
    pub fn grad_image(&self, u: &Image) -> Image {
        let p = &self.problem;
        let residual = blur_apply(&p.kernel, u).zip_map(&p.b, |a, b| a - b);
        let data = blur_adjoint(&p.kernel, &residual);
        let (gx, gy) = (kx_apply(u), ky_apply(u));
        let m = gx.zip_map(&gy, |x, y| p.rho + x * x + y * y);
        let wx = kx_adjoint(&gx.zip_map(&m, |g, m| g / m));
        let wy = ky_adjoint(&gy.zip_map(&m, |g, m| g / m));
        let mu = p.mu;
        data.zip_map(&wx.zip_map(&wy, |a, b| a + b), |d, w| d + mu * w)
    }
}

impl Objective for DeblurObjective {
    fn dim(&self) -> usize {
        self.problem.b.len()
    }

    fn eval(&self, x: &Point) -> f64 {
        self.eval_image(&self.image(x))
    }

    fn grad(&self, x: &Point) -> Point {
        self.grad_image(&self.image(x)).to_point()
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `b = A u + sigma * N(0, 1)` per pixel, from a seeded generator.
pub fn synthesize_observation(u_true: &Image, kernel: &Kernel, noise_sigma: f64, seed: u64) -> Image {
    let blurred = blur_apply(kernel, u_true);
    if noise_sigma == 0.0 {
        return blurred;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    blurred.map(|p| {
        let z: f64 = StandardNormal.sample(&mut rng);
        p + noise_sigma * z
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_image_and_observation() {
        let b = Image::zeros(5, 4);
        let f = deblur_objective(DeblurProblem::new(Kernel::default_blur(), b, 0.2, 0.5).unwrap());
        let u = Point::zeros(20);
        let expected = 0.5 * 0.2 * 20.0 * 0.5f64.ln();
        assert!((f.eval(&u) - expected).abs() < 1e-14);
        assert!(f.grad(&u).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn noiseless_observation_is_the_blur() {
        let u = crate::problems::image::phantom(16);
        let k = Kernel::default_blur();
        assert_eq!(synthesize_observation(&u, &k, 0.0, 9), blur_apply(&k, &u));
        let a = synthesize_observation(&u, &k, 0.1, 9);
        let b = synthesize_observation(&u, &k, 0.1, 9);
        assert_eq!(a, b);
        assert_ne!(a, synthesize_observation(&u, &k, 0.1, 10));
    }

    #[test]
    fn lipschitz_bound_shape() {
        let b = Image::zeros(16, 16);
        let f = deblur_objective(
            DeblurProblem::new(Kernel::default_blur(), b, DEFAULT_MU, DEFAULT_RHO).unwrap(),
        );
        let l = f.lipschitz().unwrap();
        // |A|^2 ~ 1 and |Kx|^2 + |Ky|^2 ~ 8.
        assert!(l > 1.0 + 2.0 * 0.05 * 7.0 && l < 2.0 + 2.0 * 0.05 * 8.0, "{l}");
    }
}
