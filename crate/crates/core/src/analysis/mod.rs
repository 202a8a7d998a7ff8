//! Diagnostics on top of the solvers: Lyapunov monitoring, rate fits,
//! spectral classification of critical points and Monte-Carlo saddle
//! avoidance.

pub mod lyapunov;
pub mod montecarlo;
pub mod rate;
pub mod spectral;

pub use lyapunov::{lyapunov_constants, lyapunov_sequence, LyapunovConstants, LYAPUNOV_TOLERANCE, LyapunovReport};
pub use montecarlo::{
    montecarlo_avoidance, EndpointClass, InitBox, MonteCarloReport, SampleOutcome,
};
pub use rate::{distances_to, estimate_rate, estimate_rate_window, reference_limit, RateEstimate, RateModel};
pub use spectral::{
    classify_equilibrium_continuous, classify_fixed_point_discrete, NON_HYPERBOLIC_TOLERANCE,
    SpectralClassification,
};
