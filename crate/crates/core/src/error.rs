//! Crate-wide error type.

use crate::energy::HypothesisReport;
use crate::solver::MinimizeResult;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The pulled-back metric lost rank: J = sqrt(det FᵀF) is at or below
    /// [`crate::kinematics::J_FLOOR`], so normal-dependent quantities and the
    /// orientation barrier are undefined.
    #[error("degenerate metric: J = {j:.6e}{}", node_suffix(.node))]
    DegenerateMetric { j: f64, node: Option<(usize, usize)> },

    #[error("infeasible starting field: {0}")]
    InfeasibleStart(String),

    /// A continuation step failed to converge. Results of the completed steps
    /// (including the best iterate of the failed one, last) are carried along
    /// so callers can still inspect and persist them.
    #[error("continuation step {step} did not converge")]
    SweepNotConverged {
        step: usize,
        completed: Vec<MinimizeResult>,
    },

    /// A standing hypothesis on the energy density failed. The full validator
    /// report rides along for diagnostics.
    #[error("hypothesis violation: {inequality}")]
    HypothesisViolation {
        inequality: String,
        report: Box<HypothesisReport>,
    },

    #[error("Jacobian lower bound inapplicable: q = {q} is below the exponent threshold 2p/(p-2) = {threshold}")]
    Inapplicable { q: f64, threshold: f64 },

    #[error(
        "bisection could not bracket C* = {c_star:.6e}: h({t_lo:.3e}) = {h_lo:.6e}, h({t_hi:.3e}) = {h_hi:.6e}"
    )]
    BisectionFailure {
        c_star: f64,
        t_lo: f64,
        h_lo: f64,
        t_hi: f64,
        h_hi: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn node_suffix(node: &Option<(usize, usize)>) -> String {
    match node {
        Some((i, j)) => format!(" at node ({i}, {j})"),
        None => String::new(),
    }
}
