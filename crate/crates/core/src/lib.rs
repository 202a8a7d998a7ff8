//! Inertial gradient methods with explicit and implicit Hessian-driven
//! damping for smooth non-convex objectives.
//!
//! ```
//! use hessdamp::{problems::rosenbrock, run, GammaSchedule, Method, Point, Scheme, SolverParams};
//!
//! let params = SolverParams::new(1e-3, 0.02, GammaSchedule::constant(3.0)?)?.with_max_iter(100);
//! let x0 = Point::from_vec(vec![-1.5, 0.0]);
//! let trace = run(&Method::new(Scheme::Isehd, params), &rosenbrock(), &x0, &x0)?;
//! assert_eq!(trace.records.len(), 101);
//! # Ok::<(), hessdamp::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod objective;
pub mod params;
pub mod problems;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use objective::{CountingObjective, Matrix, Objective, Point, WithLipschitz};
pub use params::{
    coefficients_at, estimate_lipschitz, validate_convergence_condition,
    validate_saddle_condition, GammaSchedule, SolverParams, StepCoefficients, Verdict,
};
pub use solvers::{run, GeneralCoefficients, Method, Scheme, SolverState, StopRule};
pub use trace::{Trace, TraceRecord};
