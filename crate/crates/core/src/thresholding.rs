//! The hard-thresholding operator, the Newton index-set selection, and the
//! stationarity residual used to certify solver outputs.

use crate::error::{Error, Result};
use crate::types::{DenseVector, IndexSet, Objective};

/// An s-sparse projection together with the indices that were kept.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    /// The thresholded vector; zero outside `support`.
    pub vector: DenseVector,
    /// Retained indices. Strictly fewer than s when the input had fewer
    /// than s nonzeros.
    pub support: IndexSet,
}

/// Indices of the `s` largest values of `score` (ties to the smaller index),
/// in ascending order. Expected O(n) via partial selection.
fn top_indices_by(n: usize, s: usize, score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let cmp = |&a: &usize, &b: &usize| {
        score(b)
            .total_cmp(&score(a))
            .then_with(|| a.cmp(&b))
    };
    if s < n {
        idx.select_nth_unstable_by(s - 1, cmp);
        idx.truncate(s);
    }
    idx.sort_unstable();
    idx
}

/// Keeps the `s` largest-magnitude entries of `x` and zeroes the rest.
///
/// Ties are broken toward the smaller index so the projection is a
/// deterministic selection from the (set-valued) operator. Entries that are
/// exactly zero are never reported as part of the support, so the support of
/// an already-sparse input is exactly its own.
pub fn hard_threshold(x: &DenseVector, s: usize) -> Result<ThresholdResult> {
    let n = x.len();
    if s < 1 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let kept = top_indices_by(n, s, |i| x[i].abs());
    let mut out = DenseVector::zeros(n);
    let mut support = Vec::with_capacity(s);
    for &i in &kept {
        if x[i] != 0.0 {
            out[i] = x[i];
            support.push(i);
        }
    }
    Ok(ThresholdResult {
        vector: out,
        support: IndexSet::from_sorted(support),
    })
}

/// Selects the Newton index set Gamma: a superset of supp(u) of cardinality
/// exactly s.
///
/// When u already has s nonzeros the set is unique (supp(u) itself);
/// otherwise the remaining slots are filled with the off-support indices of
/// largest gradient magnitude, ties to the smaller index.
pub fn choose_gamma(u: &DenseVector, grad: &DenseVector, s: usize) -> IndexSet {
    let support = IndexSet::support_of(u);
    debug_assert!(support.len() <= s, "u must be s-sparse");
    if support.len() >= s {
        return support;
    }
    let need = s - support.len();
    let candidates: Vec<usize> = (0..u.len()).filter(|&i| !support.contains(i)).collect();
    let mut scored = candidates;
    let cmp = |&a: &usize, &b: &usize| {
        grad[b]
            .abs()
            .total_cmp(&grad[a].abs())
            .then_with(|| a.cmp(&b))
    };
    if need < scored.len() {
        scored.select_nth_unstable_by(need - 1, cmp);
        scored.truncate(need);
    }
    let mut indices = support.as_slice().to_vec();
    indices.extend_from_slice(&scored);
    IndexSet::new(indices)
}

/// The s-th largest entry of |x|.
pub fn sth_largest_magnitude(x: &DenseVector, s: usize) -> f64 {
    debug_assert!(s >= 1 && s <= x.len());
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let (_, sth, _) = mags.select_nth_unstable_by(s - 1, |a, b| b.total_cmp(a));
    *sth
}

/// Residual of the alpha-stationarity conditions at an s-sparse point.
///
/// With T = supp(x) and a full support (|T| = s) the conditions are a zero
/// restricted gradient plus the bound
/// `alpha * ||grad off T||_inf <= s-th largest |x|`; the residual is the
/// larger of the two violations. With |T| < s the conditions collapse to a
/// vanishing full gradient. Zero exactly when x is alpha-stationary.
pub fn alpha_stationarity_residual<O: Objective + ?Sized>(
    obj: &O,
    x: &DenseVector,
    s: usize,
    alpha: f64,
) -> f64 {
    debug_assert!(alpha > 0.0);
    let grad = obj.gradient(x);
    let support = IndexSet::support_of(x);
    if support.len() < s {
        return grad.amax();
    }
    let mut on_support = 0.0f64;
    let mut off_support = 0.0f64;
    for i in 0..x.len() {
        let g = grad[i].abs();
        if support.contains(i) {
            on_support = on_support.max(g);
        } else {
            off_support = off_support.max(g);
        }
    }
    let floor = sth_largest_magnitude(x, s);
    on_support.max((alpha * off_support - floor).max(0.0))
}
