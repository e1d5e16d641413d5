//! Solvers for sparsity-constrained optimization
//! `min f(x) subject to ||x||_0 <= s`.
//!
//! The centerpiece is a gradient projection Newton pursuit solver: hard
//! thresholding with a backtracking line search as the main step, plus a
//! restricted Newton step that fires only once the support has stabilized or
//! the gradient has become small. The classical hard-thresholding family
//! (IHT, NIHT, HTP, CoSaMP, SP) is included for paired benchmarks, together
//! with compressive-sensing and quadratic-compressive-sensing objectives and
//! seeded experiment drivers.
//!
//! Quick start:
//!
//! ```
//! use gpnp::bench::gen_gaussian_instance;
//! use gpnp::{solve, ProblemKind, SolverConfig};
//!
//! let inst = gen_gaussian_instance(32, 128, 4, 7);
//! let cfg = SolverConfig::default_for(ProblemKind::Cs);
//! let result = solve(inst.cs().unwrap(), inst.s, &cfg).unwrap();
//! let err = gpnp::bench::relative_error(&result.x_final, &inst.x_star).unwrap();
//! assert!(err < 1e-4);
//! ```

pub mod baselines;
pub mod bench;
pub mod config;
pub mod error;
pub mod halting;
pub mod linalg;
pub mod objectives;
pub mod solver;
pub mod thresholding;
pub mod types;

pub use config::{ProblemKind, SolverConfig, X0Policy};
pub use error::{Error, Result};
pub use objectives::{CsProblem, QcsProblem};
pub use solver::{solve, solve_multistart, MultistartConfig, MultistartOutcome};
pub use types::{DenseVector, IndexSet, Objective, SolverResult, Termination};
