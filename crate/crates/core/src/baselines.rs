//! The classical hard-thresholding family for compressive sensing: IHT,
//! NIHT, HTP, CoSaMP, and SP, used as benchmark baselines.
//!
//! All five share the same outer skeleton (threshold, optionally debias,
//! optionally prune) and the same stopping rules: relative residual below
//! `residual_tol`, a stalled iterate over `stall_window` iterations, or the
//! iteration budget.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::objectives::CsProblem;
use crate::solver::IterationRecord;
use crate::thresholding::{alpha_stationarity_residual, hard_threshold};
use crate::types::{DenseVector, IndexSet, Objective, SolverResult, Termination};

/// Which baseline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineAlg {
    Iht,
    Niht,
    Htp,
    CoSaMp,
    Sp,
}

impl BaselineAlg {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineAlg::Iht => "iht",
            BaselineAlg::Niht => "niht",
            BaselineAlg::Htp => "htp",
            BaselineAlg::CoSaMp => "cosamp",
            BaselineAlg::Sp => "sp",
        }
    }
}

/// Configuration shared by the baseline solvers.
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub algorithm: BaselineAlg,
    /// Fixed step for IHT/HTP. `None` selects 1/lambda_max(A^T A), estimated
    /// by power iteration.
    pub step_mu: Option<f64>,
    pub max_iter: usize,
    /// Stop once ||Ax - b|| <= residual_tol * ||b||.
    pub residual_tol: f64,
    /// Stop after this many consecutive bit-identical iterates.
    pub stall_window: usize,
}

impl BaselineConfig {
    pub fn new(algorithm: BaselineAlg) -> Self {
        BaselineConfig {
            algorithm,
            step_mu: None,
            max_iter: 1000,
            residual_tol: 1e-8,
            stall_window: 5,
        }
    }
}

/// Relative decrease constant of the NIHT step-size acceptance test.
const NIHT_C: f64 = 0.01;
/// Cap on NIHT step halvings per iteration.
const NIHT_MAX_HALVINGS: u32 = 50;
/// Default HTP step for unit-norm columns.
const HTP_DEFAULT_MU: f64 = 1.0;
/// Sampling parameters of the restricted smoothness estimate behind the
/// default IHT step.
const IHT_MU_SAMPLES: usize = 12;
const IHT_MU_SEED: u64 = 0x6c6d6178;

/// The default IHT step 1 / lambda_max over sampled 2s-column Grams; the
/// restricted constant governs the s-sparse iterate dynamics, and on
/// orthonormal columns it reduces to the exact unit step.
pub fn iht_default_mu(p: &CsProblem, s: usize) -> f64 {
    let lambda = crate::linalg::restricted_lambda_max(
        p.matrix(),
        2 * s,
        IHT_MU_SAMPLES,
        IHT_MU_SEED,
    );
    if lambda > 0.0 {
        1.0 / lambda
    } else {
        1.0
    }
}

/// Dispatches on `cfg.algorithm`.
pub fn baseline_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    match cfg.algorithm {
        BaselineAlg::Iht => iht_solve(p, s, cfg),
        BaselineAlg::Niht => niht_solve(p, s, cfg),
        BaselineAlg::Htp => htp_solve(p, s, cfg),
        BaselineAlg::CoSaMp => cosamp_solve(p, s, cfg),
        BaselineAlg::Sp => sp_solve(p, s, cfg),
    }
}

/// Iterative hard thresholding: x <- P_s(x - mu * grad f(x)) with a fixed
/// step, by default the inverse restricted smoothness estimate.
pub fn iht_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    let mu = cfg.step_mu.unwrap_or_else(|| iht_default_mu(p, s));
    drive(p, s, cfg, 1.0f64.min(mu), |x, grad| {
        let th = hard_threshold(&(x - mu * grad), s).expect("validated s");
        let support = th.support.clone();
        Some(Step {
            next: th.vector,
            alpha: mu,
            halvings: 0,
            support,
        })
    })
}

/// Normalized IHT: the step is chosen adaptively from the gradient energy on
/// the current support, then halved until the standard acceptance condition
/// holds. The step rule is the published normalized-IHT rule, not something
/// derived here.
pub fn niht_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    let mut last_mu = 1.0;
    let result = drive(p, s, cfg, 1.0, |x, grad| {
        let support = if x.iter().all(|v| *v == 0.0) {
            hard_threshold(grad, s).expect("validated s").support
        } else {
            IndexSet::support_of(x)
        };
        let g_t = support.gather(grad);
        let g_energy = g_t.norm_squared();
        if g_energy == 0.0 {
            // Stationary on the support; propose x itself and let the stall
            // rule terminate.
            return Some(Step {
                next: x.clone(),
                alpha: 0.0,
                halvings: 0,
                support,
            });
        }
        let a_gt = p.matrix().select_columns(support.iter()) * &g_t;
        let mut mu = g_energy / a_gt.norm_squared();
        let x_support = IndexSet::support_of(x);
        for halvings in 0..=NIHT_MAX_HALVINGS {
            let th = hard_threshold(&(x - mu * grad), s).expect("validated s");
            let accepted = if th.support == x_support {
                true
            } else {
                let diff = &th.vector - x;
                let a_diff_sq = (p.matrix() * &diff).norm_squared();
                let omega = (1.0 - NIHT_C) * diff.norm_squared() / a_diff_sq;
                mu <= omega
            };
            if accepted {
                last_mu = mu;
                let support = th.support.clone();
                return Some(Step {
                    next: th.vector,
                    alpha: mu,
                    halvings,
                    support,
                });
            }
            mu *= 0.5;
        }
        None
    });
    result.map(|mut r| {
        if last_mu > 0.0 {
            r.stationarity_residual =
                alpha_stationarity_residual(p, &r.x_final, s, last_mu.min(1.0));
        }
        r
    })
}

/// Hard thresholding pursuit: threshold with a fixed step (mu = 1 by
/// default, matching unit-norm columns), then debias on the selected
/// support.
pub fn htp_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    let mu = cfg.step_mu.unwrap_or(HTP_DEFAULT_MU);
    drive(p, s, cfg, 1.0f64.min(mu), |x, grad| {
        let th = hard_threshold(&(x - mu * grad), s).expect("validated s");
        let (z, _) = p.restricted_least_squares(&th.support);
        Some(Step {
            next: z,
            alpha: mu,
            halvings: 0,
            support: th.support,
        })
    })
}

/// CoSaMP: merge the top-2s gradient indices with the current support,
/// debias on the union, prune back to s.
pub fn cosamp_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    pursuit_with_union(p, s, cfg, (2 * s).min(p.dim()))
}

/// Subspace pursuit: CoSaMP with s instead of 2s candidate indices.
pub fn sp_solve(p: &CsProblem, s: usize, cfg: &BaselineConfig) -> Result<SolverResult> {
    pursuit_with_union(p, s, cfg, s)
}

fn pursuit_with_union(
    p: &CsProblem,
    s: usize,
    cfg: &BaselineConfig,
    r_level: usize,
) -> Result<SolverResult> {
    drive(p, s, cfg, 1.0, |x, grad| {
        let candidates = hard_threshold(grad, r_level).expect("validated s").support;
        let union = candidates.union(&IndexSet::support_of(x));
        let (v, _) = p.restricted_least_squares(&union);
        let pruned = hard_threshold(&v, s).expect("validated s");
        Some(Step {
            next: pruned.vector,
            alpha: 1.0,
            halvings: 0,
            support: union,
        })
    })
}

struct Step {
    next: DenseVector,
    alpha: f64,
    halvings: u32,
    /// The index set the step worked on (threshold support or debias set).
    support: IndexSet,
}

/// Shared outer loop: stopping rules, stall detection, and bookkeeping.
fn drive(
    p: &CsProblem,
    s: usize,
    cfg: &BaselineConfig,
    stationarity_alpha: f64,
    mut step: impl FnMut(&DenseVector, &DenseVector) -> Option<Step>,
) -> Result<SolverResult> {
    let n = p.dim();
    if s < 1 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let b_norm = p.observations().norm();
    let mut x = DVector::zeros(n);
    let (mut fx, mut grad) = p.value_and_gradient(&x);
    let mut f_trace = vec![fx];
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut stall = 0usize;
    let mut k = 0usize;

    let rel_residual = |f: f64| (2.0 * f).sqrt() / b_norm.max(f64::MIN_POSITIVE);

    if (2.0 * fx).sqrt() <= cfg.residual_tol * b_norm {
        termination = Termination::HaltingMetric;
    } else {
        while k < cfg.max_iter {
            let Some(step_out) = step(&x, &grad) else {
                termination = Termination::LineSearchStalled;
                break;
            };
            let x_next = step_out.next;
            let (f_next, g_next) = p.value_and_gradient(&x_next);
            if !f_next.is_finite() {
                // Divergence (for instance an overlarge fixed step); keep the
                // last finite iterate.
                termination = Termination::LineSearchStalled;
                break;
            }
            let step_norm = (&x_next - &x).norm();
            stall = if x_next == x { stall + 1 } else { 0 };
            k += 1;
            f_trace.push(f_next);
            records.push(IterationRecord {
                k: k - 1,
                alpha: step_out.alpha,
                backtracks: step_out.halvings,
                gamma: step_out.support,
                took_newton: false,
                f_value: f_next,
                f_projected: f_next,
                pi: rel_residual(f_next),
                step_norm,
                newton_step_norm: 0.0,
            });
            x = x_next;
            fx = f_next;
            grad = g_next;
            if (2.0 * fx).sqrt() <= cfg.residual_tol * b_norm {
                termination = Termination::HaltingMetric;
                break;
            }
            if stall >= cfg.stall_window {
                termination = Termination::HaltingMetric;
                break;
            }
        }
    }

    let support = IndexSet::support_of(&x);
    let stationarity_residual = alpha_stationarity_residual(p, &x, s, stationarity_alpha.max(f64::MIN_POSITIVE));
    Ok(SolverResult {
        x_final: x,
        support,
        f_trace,
        iterations: k,
        newton_steps_taken: 0,
        termination,
        stationarity_residual,
        records,
    })
}
