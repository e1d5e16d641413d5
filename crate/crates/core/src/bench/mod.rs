//! Instance generation, recovery metrics, and the seeded experiment drivers
//! behind the success-rate, sample-sweep, scaling, and QCS tables.

pub mod rng;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::baselines::{baseline_solve, BaselineAlg, BaselineConfig};
use crate::config::{ProblemKind, SolverConfig};
use crate::error::{Error, Result};
use crate::objectives::{CsProblem, QcsProblem};
use crate::solver;
use crate::types::{DenseVector, SolverResult, Termination};

/// A recovery counts as successful below this relative error.
pub const SUCCESS_RE_ER: f64 = 1e-4;

/// PSNR reported when the error is numerically zero.
pub const PSNR_CAP_DB: f64 = 3100.0;

/// Algorithms the CS benchmarks can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Gpnp,
    Iht,
    Niht,
    Htp,
    CoSaMp,
    Sp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gpnp,
        Algorithm::Iht,
        Algorithm::Niht,
        Algorithm::Htp,
        Algorithm::CoSaMp,
        Algorithm::Sp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Gpnp => "gpnp",
            Algorithm::Iht => "iht",
            Algorithm::Niht => "niht",
            Algorithm::Htp => "htp",
            Algorithm::CoSaMp => "cosamp",
            Algorithm::Sp => "sp",
        }
    }

    fn baseline(&self) -> Option<BaselineAlg> {
        match self {
            Algorithm::Gpnp => None,
            Algorithm::Iht => Some(BaselineAlg::Iht),
            Algorithm::Niht => Some(BaselineAlg::Niht),
            Algorithm::Htp => Some(BaselineAlg::Htp),
            Algorithm::CoSaMp => Some(BaselineAlg::CoSaMp),
            Algorithm::Sp => Some(BaselineAlg::Sp),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gpnp" => Ok(Algorithm::Gpnp),
            "iht" => Ok(Algorithm::Iht),
            "niht" => Ok(Algorithm::Niht),
            "htp" => Ok(Algorithm::Htp),
            "cosamp" => Ok(Algorithm::CoSaMp),
            "sp" => Ok(Algorithm::Sp),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Problem payload of a generated instance.
#[derive(Debug, Clone)]
pub enum ProblemData {
    Cs(CsProblem),
    Qcs(QcsProblem),
}

/// A generated problem with its planted signal.
#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: ProblemKind,
    pub problem: ProblemData,
    pub x_star: DenseVector,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub s: usize,
}

impl Instance {
    /// SHA-256 over a canonical byte serialization (dims, matrix in row-major
    /// order, observations, signal), hex encoded. Used to verify that paired
    /// algorithms consumed identical instances.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update([match self.kind {
            ProblemKind::Cs => 0u8,
            ProblemKind::Qcs => 1u8,
        }]);
        for d in [self.m as u64, self.n as u64, self.s as u64, self.seed] {
            hasher.update(d.to_le_bytes());
        }
        let (matrix, obs) = match &self.problem {
            ProblemData::Cs(p) => (p.matrix(), p.observations()),
            ProblemData::Qcs(p) => (p.measurement_rows(), p.observations()),
        };
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                hasher.update(matrix[(i, j)].to_le_bytes());
            }
        }
        for v in obs.iter() {
            hasher.update(v.to_le_bytes());
        }
        for v in self.x_star.iter() {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn cs(&self) -> Option<&CsProblem> {
        match &self.problem {
            ProblemData::Cs(p) => Some(p),
            ProblemData::Qcs(_) => None,
        }
    }

    pub fn qcs(&self) -> Option<&QcsProblem> {
        match &self.problem {
            ProblemData::Qcs(p) => Some(p),
            ProblemData::Cs(_) => None,
        }
    }
}

/// An s-sparse standard-normal signal on a uniformly random support.
fn gen_signal(n: usize, s: usize, seed: u64) -> DenseVector {
    let mut support_rng = rng::stream(seed, "support");
    let support = rng::distinct_indices(&mut support_rng, n, s);
    let mut value_rng = rng::stream(seed, "values");
    let mut x = DVector::zeros(n);
    for &i in &support {
        x[i] = rng::nonzero_normal(&mut value_rng);
    }
    x
}

fn gen_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, "matrix");
    let mut a = DMatrix::zeros(m, n);
    // Column-major fill order, part of the generator contract.
    for j in 0..n {
        for i in 0..m {
            a[(i, j)] = rng::normal(&mut rng);
        }
    }
    a
}

/// A Gaussian CS instance: standard-normal matrix with unit-norm columns,
/// s-sparse standard-normal signal, exact observations b = A x*.
pub fn gen_gaussian_instance(m: usize, n: usize, s: usize, seed: u64) -> Instance {
    let mut a = gen_matrix(m, n, seed);
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        col.scale_mut(1.0 / norm);
    }
    let x_star = gen_signal(n, s, seed);
    let b = &a * &x_star;
    let problem = CsProblem::new(a, b).expect("generated data is finite");
    Instance {
        kind: ProblemKind::Cs,
        problem: ProblemData::Cs(problem),
        x_star,
        seed,
        m,
        n,
        s,
    }
}

/// A QCS instance: standard-normal measurement rows (not normalized),
/// the same signal model as the Gaussian CS instance, and quadratic
/// observations b_i = <a_i, x*>^2.
pub fn gen_qcs_instance(m: usize, n: usize, s: usize, seed: u64) -> Instance {
    let rows = gen_matrix(m, n, seed);
    let x_star = gen_signal(n, s, seed);
    let b = DVector::from_iterator(m, (&rows * &x_star).iter().map(|t| t * t));
    let problem = QcsProblem::new(rows, b).expect("generated data is finite");
    Instance {
        kind: ProblemKind::Qcs,
        problem: ProblemData::Qcs(problem),
        x_star,
        seed,
        m,
        n,
        s,
    }
}

/// ||x - x*|| / ||x*||.
pub fn relative_error(x: &DenseVector, x_star: &DenseVector) -> Result<f64> {
    let denom = x_star.norm();
    if denom == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    Ok((x - x_star).norm() / denom)
}

/// 10 log10( n / ||x - x*||^2 ), capped at `PSNR_CAP_DB` for numerically
/// exact recoveries.
pub fn psnr(x: &DenseVector, x_star: &DenseVector, n: usize) -> f64 {
    let err_sq = (x - x_star).norm_squared();
    if err_sq < 1e-300 {
        return PSNR_CAP_DB;
    }
    10.0 * (n as f64 / err_sq).log10()
}

/// One line of a benchmark table.
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub algorithm: Algorithm,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub trial: usize,
    pub seed: u64,
    pub re_er: f64,
    pub psnr: f64,
    pub f_final: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub time_s: f64,
    pub success: bool,
    pub termination: Termination,
    /// Hash of the instance this row consumed; identical across algorithms
    /// of one (cell, trial) pair.
    pub instance_hash: String,
}

/// Result rows in deterministic order (cell-major, then algorithm order as
/// requested).
#[derive(Debug, Clone)]
pub struct BenchTable {
    pub rows: Vec<TrialRow>,
}

impl BenchTable {
    pub fn success_rate(&self, alg: Algorithm, filter: impl Fn(&TrialRow) -> bool) -> f64 {
        let rows: Vec<&TrialRow> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == alg && filter(r))
            .collect();
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter().filter(|r| r.success).count() as f64 / rows.len() as f64
    }

    pub fn mean(
        &self,
        alg: Algorithm,
        filter: impl Fn(&TrialRow) -> bool,
        value: impl Fn(&TrialRow) -> f64,
    ) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == alg && filter(r))
            .map(value)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

fn solve_instance(alg: Algorithm, inst: &Instance, mu_hint: Option<f64>) -> SolverResult {
    let ms = solver::MultistartConfig::default();
    match (&inst.problem, alg.baseline()) {
        (ProblemData::Cs(p), None) => {
            let cfg = SolverConfig::default_for(ProblemKind::Cs);
            solver::solve_multistart(p, inst.s, &cfg, &ms)
                .expect("validated dimensions")
                .result
        }
        (ProblemData::Cs(p), Some(b)) => {
            let mut cfg = BaselineConfig::new(b);
            if matches!(b, BaselineAlg::Iht) {
                cfg.step_mu = mu_hint;
            }
            baseline_solve(p, inst.s, &cfg).expect("validated dimensions")
        }
        (ProblemData::Qcs(p), None) => {
            let cfg = SolverConfig::default_for(ProblemKind::Qcs);
            solver::solve_multistart(p, inst.s, &cfg, &ms)
                .expect("validated dimensions")
                .result
        }
        (ProblemData::Qcs(_), Some(_)) => {
            unreachable!("baselines are defined for CS instances only")
        }
    }
}

/// Runs one algorithm on one instance and assembles the result row.
///
/// Quadratic measurements are sign-blind (b_i = <a_i, x>^2), so QCS recovery
/// error is taken against the closer of +x* and -x*.
pub fn run_trial(alg: Algorithm, inst: &Instance, trial: usize, mu_hint: Option<f64>) -> TrialRow {
    let hash = inst.content_hash();
    let start = Instant::now();
    let result = solve_instance(alg, inst, mu_hint);
    let time_s = start.elapsed().as_secs_f64();
    let x = match inst.kind {
        ProblemKind::Cs => result.x_final.clone(),
        ProblemKind::Qcs => {
            let flipped = -&result.x_final;
            if (&flipped - &inst.x_star).norm() < (&result.x_final - &inst.x_star).norm() {
                flipped
            } else {
                result.x_final.clone()
            }
        }
    };
    let re_er = relative_error(&x, &inst.x_star).expect("nonzero planted signal");
    TrialRow {
        algorithm: alg,
        m: inst.m,
        n: inst.n,
        s: inst.s,
        trial,
        seed: inst.seed,
        re_er,
        psnr: psnr(&x, &inst.x_star, inst.n),
        f_final: result.f_final(),
        iterations: result.iterations,
        newton_steps: result.newton_steps_taken,
        time_s,
        success: re_er < SUCCESS_RE_ER,
        termination: result.termination,
        instance_hash: hash,
    }
}

/// Runs every requested algorithm on the one shared instance of a cell.
/// The default IHT step is computed once per instance.
fn run_cs_cell(algorithms: &[Algorithm], inst: &Instance, trial: usize) -> Vec<TrialRow> {
    let needs_mu = algorithms.iter().any(|a| matches!(a, Algorithm::Iht));
    let mu_hint = if needs_mu {
        inst.cs().map(|p| crate::baselines::iht_default_mu(p, inst.s))
    } else {
        None
    };
    algorithms
        .iter()
        .map(|&alg| run_trial(alg, inst, trial, mu_hint))
        .collect()
}

/// Parallel map over cells with a deterministic output order: rows are keyed
/// by cell index, never by completion order.
fn run_cells<C: Sync>(cells: &[C], f: impl Fn(&C) -> Vec<TrialRow> + Sync) -> BenchTable {
    let mut indexed: Vec<(usize, Vec<TrialRow>)> =
        cells.par_iter().enumerate().map(|(i, c)| (i, f(c))).collect();
    indexed.sort_by_key(|(i, _)| *i);
    BenchTable {
        rows: indexed.into_iter().flat_map(|(_, rows)| rows).collect(),
    }
}

/// Success rates over a sparsity grid at fixed (m, n). All algorithms see
/// the identical instance per (s, trial) cell; the instance seed is
/// `base_seed + trial`.
pub fn run_success_rate(
    algorithms: &[Algorithm],
    m: usize,
    n: usize,
    s_values: &[usize],
    trials: usize,
    base_seed: u64,
) -> BenchTable {
    let cells: Vec<(usize, usize)> = s_values
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .collect();
    run_cells(&cells, |&(s, trial)| {
        let inst = gen_gaussian_instance(m, n, s, base_seed + trial as u64);
        run_cs_cell(algorithms, &inst, trial)
    })
}

/// Success rates over a sample-size sweep m = floor(frac * n) at fixed
/// (n, s).
pub fn run_sample_sweep(
    algorithms: &[Algorithm],
    n: usize,
    s: usize,
    m_fracs: &[f64],
    trials: usize,
    base_seed: u64,
) -> BenchTable {
    let cells: Vec<(usize, usize)> = m_fracs
        .iter()
        .map(|&f| (f * n as f64).floor() as usize)
        .flat_map(|m| (0..trials).map(move |t| (m, t)))
        .collect();
    run_cells(&cells, |&(m, trial)| {
        let inst = gen_gaussian_instance(m, n, s, base_seed + trial as u64);
        run_cs_cell(algorithms, &inst, trial)
    })
}

/// Mean recovery error and wall time per algorithm over larger sizes.
pub fn run_scaling(
    algorithms: &[Algorithm],
    sizes: &[(usize, usize, usize)],
    trials: usize,
    base_seed: u64,
) -> BenchTable {
    let cells: Vec<((usize, usize, usize), usize)> = sizes
        .iter()
        .flat_map(|&dims| (0..trials).map(move |t| (dims, t)))
        .collect();
    run_cells(&cells, |&((m, n, s), trial)| {
        let inst = gen_gaussian_instance(m, n, s, base_seed + trial as u64);
        run_cs_cell(algorithms, &inst, trial)
    })
}

/// QCS experiments. The success grid runs the solver at (m = 80, n = 120)
/// over `s_values`; the scaling grid runs it at (m, s) = (0.8 n, 0.01 n)
/// for each requested n. Only the Newton-pursuit solver applies to QCS.
pub fn run_qcs(
    s_values: &[usize],
    n_values: &[usize],
    trials: usize,
    base_seed: u64,
) -> BenchTable {
    #[derive(Clone, Copy)]
    struct QcsCell {
        m: usize,
        n: usize,
        s: usize,
        trial: usize,
    }
    let mut cells: Vec<QcsCell> = Vec::new();
    for &s in s_values {
        for trial in 0..trials {
            cells.push(QcsCell { m: 80, n: 120, s, trial });
        }
    }
    for &n in n_values {
        let m = (0.8 * n as f64).floor() as usize;
        let s = ((0.01 * n as f64).floor() as usize).max(1);
        for trial in 0..trials {
            cells.push(QcsCell { m, n, s, trial });
        }
    }
    run_cells(&cells, |c| {
        let inst = gen_qcs_instance(c.m, c.n, c.s, base_seed + c.trial as u64);
        vec![run_trial(Algorithm::Gpnp, &inst, c.trial, None)]
    })
}
