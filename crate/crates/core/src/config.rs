//! Solver configuration and the standard parameter set used throughout the
//! experiments.

use crate::types::DenseVector;

/// Which objective family an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Linear compressive sensing, f(x) = 1/2 ||Ax - b||^2.
    Cs,
    /// Quadratic compressive sensing, the quartic f built from rank-one
    /// quadratic measurements.
    Qcs,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Cs => "cs",
            ProblemKind::Qcs => "qcs",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(ProblemKind::Cs),
            "qcs" => Ok(ProblemKind::Qcs),
            other => Err(format!("unknown problem kind '{other}' (expected cs or qcs)")),
        }
    }
}

/// Choice of starting point.
///
/// The all-zeros start suits linear CS; the quartic QCS objective has a
/// vanishing gradient at the origin, so it starts from all-ones instead.
#[derive(Debug, Clone, PartialEq)]
pub enum X0Policy {
    AllZeros,
    AllOnes,
    Custom(DenseVector),
}

impl X0Policy {
    pub fn realize(&self, n: usize) -> DenseVector {
        match self {
            X0Policy::AllZeros => DenseVector::zeros(n),
            X0Policy::AllOnes => DenseVector::from_element(n, 1.0),
            X0Policy::Custom(x) => x.clone(),
        }
    }
}

/// Parameters of the gradient projection Newton pursuit loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial step scale tau > 0 of the backtracking search.
    pub tau: f64,
    /// Sufficient-decrease constant sigma > 0.
    pub sigma: f64,
    /// Backtracking factor gamma in (0, 1).
    pub gamma: f64,
    /// Gradient-norm tolerance that switches the Newton step on.
    pub epsilon_gate: f64,
    /// Halting tolerance on the progress metric.
    pub epsilon_halt: f64,
    /// Window length parameter of the halting metric.
    pub k0: usize,
    pub max_iter: usize,
    /// Cap on backtracking halvings per iteration; exhausting it terminates
    /// the solve with `LineSearchStalled`.
    pub max_backtracks: usize,
    pub x0_policy: X0Policy,
}

impl SolverConfig {
    /// The standard parameter set: tau = 5, sigma = 1e-4, gamma = 0.5,
    /// gate tolerance 0.01, halting tolerance 1e-5, k0 = 5, at most 5000
    /// iterations. CS starts from zeros, QCS from ones.
    pub fn default_for(kind: ProblemKind) -> Self {
        SolverConfig {
            tau: 5.0,
            sigma: 1e-4,
            gamma: 0.5,
            epsilon_gate: 0.01,
            epsilon_halt: 1e-5,
            k0: 5,
            max_iter: 5000,
            max_backtracks: 50,
            x0_policy: match kind {
                ProblemKind::Cs => X0Policy::AllZeros,
                ProblemKind::Qcs => X0Policy::AllOnes,
            },
        }
    }
}
