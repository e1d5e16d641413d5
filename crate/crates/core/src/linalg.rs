//! Small dense factorizations shared by the solvers.

use nalgebra::{DMatrix, DVector};

/// Relative pivot floor for the SPD factorization: a pivot counts as zero
/// when it falls below `SPD_PIVOT_REL_TOL * max diagonal entry`.
pub const SPD_PIVOT_REL_TOL: f64 = 1e-12;

/// Attempts a Cholesky solve of `h * x = rhs` for a symmetric `h`.
///
/// Returns `None` when the factorization encounters a pivot at or below the
/// relative tolerance, i.e. when `h` is not numerically positive definite.
pub fn spd_solve(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    debug_assert_eq!(h.ncols(), n);
    debug_assert_eq!(rhs.len(), n);

    let max_diag = (0..n).map(|i| h[(i, i)]).fold(0.0f64, f64::max);
    if !max_diag.is_finite() || max_diag <= 0.0 {
        return None;
    }
    let floor = SPD_PIVOT_REL_TOL * max_diag;

    // Lower-triangular factor, column by column.
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut v = h[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }

    // Forward then backward substitution.
    let mut y = rhs.clone();
    for i in 0..n {
        for k in 0..i {
            let c = l[(i, k)] * y[k];
            y[i] -= c;
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let c = l[(k, i)] * y[k];
            y[i] -= c;
        }
        y[i] /= l[(i, i)];
    }
    Some(y)
}

/// Outcome flag of a least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    FullRank,
    /// The coefficient matrix was rank deficient; the minimum-norm solution
    /// was returned instead.
    RankDeficient,
}

/// Solves `min ||a z - b||` by Householder QR, falling back to an SVD
/// minimum-norm solve when `a` is numerically rank deficient.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, LsStatus) {
    let k = a.ncols();
    if k == 0 {
        return (DVector::zeros(0), LsStatus::FullRank);
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    let tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let full_rank = (0..k).all(|i| r[(i, i)].abs() > tol);
    if full_rank {
        let qtb = qr.q().transpose() * b;
        if let Some(z) = r.solve_upper_triangular(&qtb) {
            return (z, LsStatus::FullRank);
        }
    }
    let svd = a.clone().svd(true, true);
    let z = svd
        .solve(b, 1e-12 * svd.singular_values.max())
        .expect("svd solve with computed factors");
    (z.column(0).into_owned(), LsStatus::RankDeficient)
}

/// Estimates the largest eigenvalue of `A^T A` with 50 power iterations from
/// a deterministic all-ones start.
pub fn lambda_max_gram(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..50 {
        let av = a * &v;
        let w = a.tr_mul(&av);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}

/// Estimates the restricted smoothness constant
/// `max_{|T| = cols} lambda_max(A_T^T A_T)` by power-iterating a fixed
/// number of seeded random column subsets and taking the largest value
/// found. Deterministic for fixed inputs.
pub fn restricted_lambda_max(a: &DMatrix<f64>, cols: usize, samples: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let n = a.ncols();
    let cols = cols.clamp(1, n);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut pool: Vec<usize> = (0..n).collect();
    for _ in 0..samples {
        for i in 0..cols {
            let j = i + rng.random_range(0..n - i);
            pool.swap(i, j);
        }
        let block = a.select_columns(pool[..cols].iter());
        let mut v = DVector::from_element(cols, 1.0 / (cols as f64).sqrt());
        let mut lambda = 0.0;
        for _ in 0..15 {
            let w = block.tr_mul(&(&block * &v));
            let norm = w.norm();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            lambda = norm;
            v = w / norm;
        }
        best = best.max(lambda);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn spd_solve_matches_nalgebra_cholesky() {
        for seed in 0..10 {
            let g = random_matrix(8, 5, seed);
            let h = g.tr_mul(&g) + DMatrix::identity(5, 5) * 0.1;
            let rhs = random_matrix(5, 1, 100 + seed).column(0).into_owned();
            let ours = spd_solve(&h, &rhs).expect("SPD system");
            let theirs = nalgebra::Cholesky::new(h.clone()).unwrap().solve(&rhs);
            assert_relative_eq!(ours, theirs, epsilon = 1e-10);
        }
    }

    #[test]
    fn spd_solve_declines_indefinite_matrices() {
        let h = nalgebra::dmatrix![1.0, 0.0; 0.0, -1.0];
        assert!(spd_solve(&h, &nalgebra::dvector![1.0, 1.0]).is_none());
        // Singular: two identical rows/columns.
        let h = nalgebra::dmatrix![1.0, 1.0; 1.0, 1.0];
        assert!(spd_solve(&h, &nalgebra::dvector![1.0, 1.0]).is_none());
    }

    #[test]
    fn least_squares_solves_consistent_systems() {
        let a = random_matrix(10, 4, 3);
        let z_true = nalgebra::dvector![1.0, -2.0, 0.5, 3.0];
        let b = &a * &z_true;
        let (z, status) = least_squares(&a, &b);
        assert_eq!(status, LsStatus::FullRank);
        assert_relative_eq!(z, z_true, epsilon = 1e-10);
    }

    #[test]
    fn least_squares_flags_rank_deficiency_and_returns_min_norm() {
        // Two identical columns: solutions form a line; min-norm splits the
        // coefficient evenly.
        let col = random_matrix(6, 1, 5);
        let mut a = DMatrix::zeros(6, 2);
        a.set_column(0, &col.column(0));
        a.set_column(1, &col.column(0));
        let b = col.column(0) * 2.0;
        let (z, status) = least_squares(&a, &b.into_owned());
        assert_eq!(status, LsStatus::RankDeficient);
        assert_relative_eq!(z[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(z[1], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn lambda_max_matches_eigendecomposition() {
        let a = random_matrix(12, 7, 9);
        let gram = a.tr_mul(&a);
        let eigs = gram.symmetric_eigenvalues();
        let exact = eigs.iter().cloned().fold(0.0f64, f64::max);
        let est = lambda_max_gram(&a);
        assert_relative_eq!(est, exact, max_relative = 1e-6);
    }
}
