//! Linear stability of critical points, one Hessian eigenvalue at a time.
//!
//! At a critical point with Hessian eigenvalue `eta`, each discrete scheme
//! contributes two multipliers, the roots of a scalar quadratic; the
//! continuous systems contribute the roots of `l^2 + (c + eta beta) l + eta`.
//!
//! For the discrete schemes the roots are computed as `l = 1 + mu`, which
//! keeps `|l| - 1` accurate when it is far below machine epsilon (small
//! steps put every multiplier close to 1).

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::solvers::Scheme;

/// Band around `|l| = 1` (discrete) or `Re l = 0` (continuous) treated as
/// non-hyperbolic.
pub const NON_HYPERBOLIC_TOLERANCE: f64 = 1e-9;

const COINCIDENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralClassification {
    pub roots: Vec<Complex<f64>>,
    /// `|l|` for discrete maps, `Re l` for continuous systems.
    pub multipliers: Vec<f64>,
    /// Signed distance to the stability boundary: `|l| - 1` or `Re l`.
    pub margins: Vec<f64>,
    pub is_unstable: bool,
    pub is_hyperbolic: bool,
}

impl SpectralClassification {
    fn from_parts(roots: Vec<Complex<f64>>, multipliers: Vec<f64>, margins: Vec<f64>) -> Self {
        let is_unstable = margins.iter().any(|&m| m > 0.0);
        let is_hyperbolic = margins.iter().all(|m| m.abs() > NON_HYPERBOLIC_TOLERANCE);
        Self {
            roots,
            multipliers,
            margins,
            is_unstable,
            is_hyperbolic,
        }
    }

    pub fn max_multiplier(&self) -> f64 {
        self.multipliers.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Roots of `mu^2 + p mu + q = 0`, shifted to `l = 1 + mu`, with their
/// margins. `q_minus_p` is `|l|^2 - 1` for a complex pair, passed in
/// separately so the caller can form it without cancellation.
fn shifted_roots(p: f64, q: f64, q_minus_p: f64, out: &mut SpectralParts) {
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        let t = -0.5 * (p + sign(p) * disc.sqrt());
        let mu = [t, if t != 0.0 { q / t } else { 0.0 }];
        for m in mu {
            let l = 1.0 + m;
            out.roots.push(Complex::new(l, 0.0));
            let margin = if l >= 0.0 { m } else { -2.0 - m };
            out.multipliers.push(1.0 + margin);
            out.margins.push(margin);
        }
    } else {
        let (re, im) = (1.0 - 0.5 * p, 0.5 * (-disc).sqrt());
        let modulus = (1.0 + q_minus_p).sqrt();
        let margin = q_minus_p / (modulus + 1.0);
        for z in [Complex::new(re, im), Complex::new(re, -im)] {
            out.roots.push(z);
            out.multipliers.push(modulus);
            out.margins.push(margin);
        }
    }
}

#[derive(Default)]
struct SpectralParts {
    roots: Vec<Complex<f64>>,
    multipliers: Vec<f64>,
    margins: Vec<f64>,
}

/// Multipliers of the iteration map at a fixed point with Hessian
/// eigenvalues `hessian_eigs`.
///
/// `alpha` and `s` are the momentum and step coefficients; `beta` is the
/// gradient-difference weight `beta_k` of the explicit scheme or the
/// extrapolation `beta' = beta/h` of the implicit one. The explicit
/// multipliers solve `l^2 + l (eta (beta_k + s) - (1 + alpha)) + alpha - eta beta_k = 0`,
/// the implicit ones `l^2 - l ((1 + alpha) - s (1 + beta') eta) + alpha - s beta' eta = 0`.
///
/// The parameter coincidence `alpha = beta_k/(beta_k + s)` (resp.
/// `beta'/(beta' + 1)`), which happens exactly when `beta c = 1`, is rejected.
pub fn classify_fixed_point_discrete(
    scheme: Scheme,
    hessian_eigs: &[f64],
    alpha: f64,
    beta: f64,
    s: f64,
) -> Result<SpectralClassification> {
    if !(alpha > 0.0 && alpha < 1.0 && s > 0.0 && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < alpha < 1, s > 0, beta >= 0; got alpha = {alpha}, s = {s}, beta = {beta}"
        )));
    }
    let explicit = match scheme {
        Scheme::Isehd | Scheme::IsehdGeneral | Scheme::Hbf => true,
        Scheme::Isihd | Scheme::IsihdGeneral => false,
        Scheme::Gd => {
            return Err(Error::InvalidParameter(
                "gradient descent has no two-step multipliers".into(),
            ))
        }
    };
    let one_minus_alpha = 1.0 - alpha;
    if beta > 0.0 {
        // Both gaps equal alpha (beta c - 1) in terms of the original parameters.
        let gap = if explicit {
            (one_minus_alpha * (beta + s) - s) / s
        } else {
            one_minus_alpha * (beta + 1.0) - 1.0
        };
        if gap.abs() <= COINCIDENCE_TOLERANCE {
            return Err(Error::ExcludedCoincidence);
        }
    }
    let mut parts = SpectralParts::default();
    for &eta in hessian_eigs {
        let q = eta * s;
        let (p, q_minus_p) = if explicit {
            (
                one_minus_alpha + eta * (beta + s),
                -one_minus_alpha - eta * beta,
            )
        } else {
            (
                one_minus_alpha + s * (1.0 + beta) * eta,
                -one_minus_alpha - s * beta * eta,
            )
        };
        shifted_roots(p, q, q_minus_p, &mut parts);
    }
    Ok(SpectralClassification::from_parts(
        parts.roots,
        parts.multipliers,
        parts.margins,
    ))
}

/// Eigenvalues of the linearized continuous system at an equilibrium: the
/// roots of `l^2 + (c + eta beta) l + eta = 0` for each Hessian eigenvalue.
pub fn classify_equilibrium_continuous(
    hessian_eigs: &[f64],
    c: f64,
    beta: f64,
) -> Result<SpectralClassification> {
    if !(c > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and beta > 0, got c = {c}, beta = {beta}"
        )));
    }
    if (beta * c - 1.0).abs() <= COINCIDENCE_TOLERANCE {
        return Err(Error::ExcludedCoincidence);
    }
    let mut roots = Vec::with_capacity(2 * hessian_eigs.len());
    for &eta in hessian_eigs {
        let b = c + eta * beta;
        let disc = b * b - 4.0 * eta;
        if disc >= 0.0 {
            let t = -0.5 * (b + sign(b) * disc.sqrt());
            roots.push(Complex::new(t, 0.0));
            roots.push(Complex::new(if t != 0.0 { eta / t } else { 0.0 }, 0.0));
        } else {
            let im = 0.5 * (-disc).sqrt();
            roots.push(Complex::new(-0.5 * b, im));
            roots.push(Complex::new(-0.5 * b, -im));
        }
    }
    let re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    Ok(SpectralClassification::from_parts(roots, re.clone(), re))
}
