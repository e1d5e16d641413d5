//! Shared numeric types: dense iterates, support sets, the objective
//! contract, and solver results.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense iterate in R^n. All problem data must be finite; iterates produced
/// by the solvers stay finite because every accepted step is value-checked.
pub type DenseVector = DVector<f64>;

/// Checks every entry of problem data for NaN/Inf at construction time.
pub(crate) fn ensure_finite(entries: impl IntoIterator<Item = f64>, what: &'static str) -> Result<()> {
    for v in entries {
        if !v.is_finite() {
            return Err(Error::NonFinite(what));
        }
    }
    Ok(())
}

/// A sorted, duplicate-free set of zero-based indices.
///
/// Used for supports `supp(x)` and the Newton index sets `Gamma_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Builds a set from arbitrary indices, sorting and deduplicating.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet { indices }
    }

    /// Builds a set from indices already sorted ascending with no duplicates.
    ///
    /// Debug builds verify the precondition.
    pub fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        IndexSet { indices }
    }

    pub fn empty() -> Self {
        IndexSet { indices: Vec::new() }
    }

    /// The support of `x`: indices of its nonzero entries.
    pub fn support_of(x: &DenseVector) -> Self {
        IndexSet {
            indices: (0..x.len()).filter(|&i| x[i] != 0.0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        merged.extend_from_slice(&self.indices);
        merged.extend_from_slice(&other.indices);
        IndexSet::new(merged)
    }

    /// Restricts `x` to this set, returning the |T|-dimensional subvector.
    pub fn gather(&self, x: &DenseVector) -> DenseVector {
        DVector::from_iterator(self.len(), self.indices.iter().map(|&i| x[i]))
    }

    /// Embeds a |T|-dimensional subvector into R^n, zero off the set.
    pub fn scatter(&self, sub: &DenseVector, n: usize) -> DenseVector {
        let mut out = DVector::zeros(n);
        for (k, &i) in self.indices.iter().enumerate() {
            out[i] = sub[k];
        }
        out
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// The objective contract consumed by the solvers: value, gradient, and the
/// Hessian block restricted to an index set.
///
/// Implementations must be pure with respect to `&self` so that shared
/// problems can be solved from many threads concurrently.
pub trait Objective: Sync {
    /// Ambient dimension n.
    fn dim(&self) -> usize;

    /// f(x).
    fn value(&self, x: &DenseVector) -> f64;

    /// The full gradient of f at x.
    fn gradient(&self, x: &DenseVector) -> DenseVector;

    /// The |Gamma| x |Gamma| Hessian block of f at x indexed by `gamma`.
    ///
    /// Consumers symmetrize the returned block, so small asymmetries from
    /// numerical assembly are tolerated.
    fn restricted_hessian(&self, x: &DenseVector, gamma: &IndexSet) -> DMatrix<f64>;

    /// f(x) and its gradient together; override when the two share work.
    fn value_and_gradient(&self, x: &DenseVector) -> (f64, DenseVector) {
        (self.value(x), self.gradient(x))
    }
}

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The halting metric dropped to the tolerance.
    HaltingMetric,
    /// The iteration budget was exhausted.
    MaxIterations,
    /// No backtracking step achieved sufficient decrease; signals violated
    /// smoothness assumptions or numerical breakdown.
    LineSearchStalled,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::HaltingMetric => "halting-metric",
            Termination::MaxIterations => "max-iterations",
            Termination::LineSearchStalled => "line-search-stalled",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output of a solver run.
///
/// For the Newton-pursuit solver, `f_trace` is non-increasing (strictly
/// decreasing until the iterates settle); first-order baselines with a fixed
/// step make no such guarantee.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x_final: DenseVector,
    /// supp(x_final).
    pub support: IndexSet,
    /// f at the accepted iterates x^0, x^1, ..., x_final.
    pub f_trace: Vec<f64>,
    /// Number of outer iterations performed.
    pub iterations: usize,
    pub newton_steps_taken: usize,
    pub termination: Termination,
    /// Residual of the alpha-stationarity conditions at `x_final`.
    pub stationarity_residual: f64,
    /// Per-iteration step metadata (empty for baselines that do not record it).
    pub records: Vec<crate::solver::IterationRecord>,
}

impl SolverResult {
    pub fn f_final(&self) -> f64 {
        *self.f_trace.last().expect("f_trace holds at least f(x^0)")
    }
}
