use crate::objective::Point;
use crate::solvers::Scheme;

/// State of one iteration as seen by the monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iterations performed so far; record 0 holds the initial state.
    pub k: usize,
    pub x: Point,
    pub f_value: f64,
    /// `|grad f(x_k)|`
    pub residual: f64,
    /// `V_k`; NaN when the scheme's Lyapunov weight needs an unknown
    /// Lipschitz constant.
    pub lyapunov: f64,
    /// `|x_k - x_{k-1}|`
    pub step_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub scheme: Scheme,
    pub records: Vec<TraceRecord>,
    /// Set when a non-finite gradient or iterate stopped the run early.
    pub diverged: bool,
    /// Gradient evaluations made by the scheme itself (including the initial
    /// previous-gradient cache of the explicit schemes).
    pub solver_grad_evals: usize,
    /// Gradient evaluations made only to report residuals.
    pub monitor_grad_evals: usize,
    /// Wall-clock seconds since the start of the run, one per record.
    pub wall_times: Vec<f64>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    /// True when both traces visit bit-identical iterates.
    pub fn bit_identical(&self, other: &Trace) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.x.len() == b.x.len()
                    && a.x
                        .iter()
                        .zip(b.x.iter())
                        .all(|(u, v)| u.to_bits() == v.to_bits())
            })
    }
}
