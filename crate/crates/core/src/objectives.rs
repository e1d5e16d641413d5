//! Concrete objectives: compressive-sensing least squares and the quartic
//! quadratic-compressive-sensing objective, plus the restricted
//! least-squares debiasing solve and the s-regularity diagnostic.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, LsStatus};
use crate::types::{ensure_finite, DenseVector, IndexSet, Objective};

/// Dense matrix-vector product that exploits sparsity of `x` when it pays.
fn mul_sparse_aware(a: &DMatrix<f64>, x: &DenseVector) -> DVector<f64> {
    let nnz = x.iter().filter(|v| **v != 0.0).count();
    if nnz * 4 <= x.len() {
        let mut out = DVector::zeros(a.nrows());
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                out.axpy(v, &a.column(i), 1.0);
            }
        }
        out
    } else {
        a * x
    }
}

/// Linear compressive sensing: f(x) = 1/2 ||A x - b||^2.
#[derive(Debug, Clone)]
pub struct CsProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl CsProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptyInput("sensing matrix must be at least 1x1"));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
                context: "observation vector length vs matrix rows",
            });
        }
        ensure_finite(a.iter().cloned(), "sensing matrix")?;
        ensure_finite(b.iter().cloned(), "observation vector")?;
        Ok(CsProblem { a, b })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn residual(&self, x: &DenseVector) -> DVector<f64> {
        mul_sparse_aware(&self.a, x) - &self.b
    }

    /// Right-hand side of the closed-form Newton system on Gamma:
    /// `A_Gamma^T A_Gamma v = A_Gamma^T b`, i.e. exact debiasing.
    pub fn newton_rhs(&self, gamma: &IndexSet) -> DVector<f64> {
        self.a.select_columns(gamma.iter()).tr_mul(&self.b)
    }

    /// Minimizes f over vectors supported on `t`, via an orthogonal
    /// factorization of the column block. Rank-deficient blocks yield the
    /// minimum-norm solution, flagged in the returned status.
    pub fn restricted_least_squares(&self, t: &IndexSet) -> (DenseVector, LsStatus) {
        let block = self.a.select_columns(t.iter());
        let (z, status) = least_squares(&block, &self.b);
        (t.scatter(&z, self.a.ncols()), status)
    }

    /// The s-regularity modulus: the minimum over all s-column submatrices
    /// of the smallest Gram eigenvalue. Positive exactly when every s
    /// columns of A are linearly independent.
    ///
    /// Enumerates all C(n, s) supports, guarded at 10^6.
    pub fn lambda_s(&self, s: usize) -> Result<f64> {
        const LIMIT: u128 = 1_000_000;
        let n = self.a.ncols();
        if s < 1 || s > n {
            return Err(Error::InvalidSparsity { s, n });
        }
        let count = binomial(n, s);
        if count > LIMIT {
            return Err(Error::CombinatorialGuard {
                n,
                s,
                count,
                limit: LIMIT,
            });
        }
        let mut min_eig = f64::INFINITY;
        for combo in (0..n).combinations(s) {
            let block = self.a.select_columns(combo.iter());
            let gram = block.tr_mul(&block);
            let lam = gram
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            min_eig = min_eig.min(lam);
        }
        Ok(min_eig)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

impl Objective for CsProblem {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.a.tr_mul(&self.residual(x))
    }

    fn value_and_gradient(&self, x: &DenseVector) -> (f64, DenseVector) {
        let r = self.residual(x);
        (0.5 * r.norm_squared(), self.a.tr_mul(&r))
    }

    fn restricted_hessian(&self, _x: &DenseVector, gamma: &IndexSet) -> DMatrix<f64> {
        let block = self.a.select_columns(gamma.iter());
        block.tr_mul(&block)
    }
}

/// Quadratic compressive sensing: rank-one quadratic measurements
/// b_i = <a_i, x>^2 and the quartic objective
/// f(x) = 1/(4m) * sum_i (<a_i, x>^2 - b_i)^2.
#[derive(Debug, Clone)]
pub struct QcsProblem {
    /// Row i is a_i^T.
    rows: DMatrix<f64>,
    b: DVector<f64>,
}

impl QcsProblem {
    pub fn new(rows: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::EmptyInput("measurement rows must be at least 1x1"));
        }
        if b.len() != rows.nrows() {
            return Err(Error::DimensionMismatch {
                expected: rows.nrows(),
                got: b.len(),
                context: "observation vector length vs measurement count",
            });
        }
        ensure_finite(rows.iter().cloned(), "measurement rows")?;
        ensure_finite(b.iter().cloned(), "observation vector")?;
        Ok(QcsProblem { rows, b })
    }

    pub fn measurement_rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.b
    }

    /// Inner products t_i = <a_i, x>.
    fn inner_products(&self, x: &DenseVector) -> DVector<f64> {
        mul_sparse_aware(&self.rows, x)
    }
}

impl Objective for QcsProblem {
    fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let t = self.inner_products(x);
        let m = self.rows.nrows() as f64;
        t.iter()
            .zip(self.b.iter())
            .map(|(&ti, &bi)| {
                let d = ti * ti - bi;
                d * d
            })
            .sum::<f64>()
            / (4.0 * m)
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let t = self.inner_products(x);
        let m = self.rows.nrows() as f64;
        // (1/m) sum_i (t_i^2 - b_i) t_i a_i
        let weights = DVector::from_iterator(
            t.len(),
            t.iter()
                .zip(self.b.iter())
                .map(|(&ti, &bi)| (ti * ti - bi) * ti / m),
        );
        self.rows.tr_mul(&weights)
    }

    fn value_and_gradient(&self, x: &DenseVector) -> (f64, DenseVector) {
        let t = self.inner_products(x);
        let m = self.rows.nrows() as f64;
        let mut value = 0.0;
        let weights = DVector::from_iterator(
            t.len(),
            t.iter().zip(self.b.iter()).map(|(&ti, &bi)| {
                let d = ti * ti - bi;
                value += d * d;
                d * ti / m
            }),
        );
        (value / (4.0 * m), self.rows.tr_mul(&weights))
    }

    fn restricted_hessian(&self, x: &DenseVector, gamma: &IndexSet) -> DMatrix<f64> {
        // (1/m) sum_i (3 t_i^2 - b_i) a_{i,Gamma} a_{i,Gamma}^T
        let t = self.inner_products(x);
        let m = self.rows.nrows() as f64;
        let block = self.rows.select_columns(gamma.iter());
        let mut weighted = block.clone();
        for i in 0..weighted.nrows() {
            let w = (3.0 * t[i] * t[i] - self.b[i]) / m;
            weighted.row_mut(i).scale_mut(w);
        }
        block.tr_mul(&weighted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_cs(b: &[f64]) -> CsProblem {
        let n = b.len();
        CsProblem::new(DMatrix::identity(n, n), DVector::from_row_slice(b)).unwrap()
    }

    #[test]
    fn cs_value_examples() {
        let p = identity_cs(&[1.0, 2.0]);
        assert_eq!(p.value(&dvector![0.0, 0.0]), 2.5);
        assert_eq!(p.value(&dvector![1.0, 2.0]), 0.0);

        let p = CsProblem::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0]).unwrap();
        assert_eq!(p.value(&dvector![1.0, 1.0]), 5.0);
    }

    #[test]
    fn cs_gradient_examples() {
        let p = identity_cs(&[1.0, 2.0]);
        assert_eq!(p.gradient(&dvector![0.0, 0.0]), dvector![-1.0, -2.0]);
        assert_eq!(p.gradient(&dvector![1.0, 2.0]), dvector![0.0, 0.0]);

        let p = CsProblem::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0]).unwrap();
        assert_eq!(p.gradient(&dvector![1.0, 1.0]), dvector![3.0, 7.0]);
    }

    #[test]
    fn cs_restricted_hessian_examples() {
        let p = CsProblem::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0]).unwrap();
        let h = p.restricted_hessian(&dvector![0.0, 0.0], &IndexSet::new(vec![0, 1]));
        assert_eq!(h, dmatrix![1.0, 2.0; 2.0, 5.0]);

        let id = identity_cs(&[0.0, 0.0, 0.0]);
        let h = id.restricted_hessian(&dvector![0.0, 0.0, 0.0], &IndexSet::new(vec![0, 2]));
        assert_eq!(h, DMatrix::identity(2, 2));

        // Singleton block is the squared column norm.
        let h = p.restricted_hessian(&dvector![0.0, 0.0], &IndexSet::new(vec![1]));
        assert_eq!(h[(0, 0)], 5.0);
    }

    #[test]
    fn newton_rhs_examples() {
        let p = identity_cs(&[1.0, 2.0]);
        assert_eq!(p.newton_rhs(&IndexSet::new(vec![1]))[0], 2.0);

        let zero = CsProblem::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0]).unwrap();
        assert_eq!(zero.newton_rhs(&IndexSet::new(vec![0, 1])), dvector![0.0, 0.0]);
    }

    #[test]
    fn newton_system_reproduces_restricted_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(8, 6, |_, _| rng.random::<f64>() - 0.5);
        let b = DVector::from_fn(8, |_, _| rng.random::<f64>() - 0.5);
        let p = CsProblem::new(a, b).unwrap();
        let gamma = IndexSet::new(vec![1, 3, 4]);

        let h = p.restricted_hessian(&DVector::zeros(6), &gamma);
        let rhs = p.newton_rhs(&gamma);
        let v_gamma = crate::linalg::spd_solve(&h, &rhs).expect("regular block");
        let via_newton = gamma.scatter(&v_gamma, 6);

        let (via_ls, status) = p.restricted_least_squares(&gamma);
        assert_eq!(status, LsStatus::FullRank);
        assert_relative_eq!(via_newton, via_ls, epsilon = 1e-10);
    }

    #[test]
    fn restricted_least_squares_examples() {
        let p = identity_cs(&[1.0, 2.0]);
        let (z, status) = p.restricted_least_squares(&IndexSet::new(vec![1]));
        assert_eq!(status, LsStatus::FullRank);
        assert_relative_eq!(z, dvector![0.0, 2.0], epsilon = 1e-12);

        // b orthogonal to the selected column: zero on T.
        let p = CsProblem::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 1.0]).unwrap();
        let (z, _) = p.restricted_least_squares(&IndexSet::new(vec![0]));
        assert_eq!(z, dvector![0.0, 0.0]);
    }

    #[test]
    fn restricted_least_squares_recovers_planted_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = DMatrix::from_fn(10, 7, |_, _| rng.random::<f64>() - 0.5);
        let mut x_star = DVector::zeros(7);
        x_star[2] = 1.5;
        x_star[5] = -0.25;
        let b = &a * &x_star;
        let p = CsProblem::new(a, b).unwrap();
        let (z, status) = p.restricted_least_squares(&IndexSet::new(vec![2, 5]));
        assert_eq!(status, LsStatus::FullRank);
        assert_relative_eq!(z, x_star, epsilon = 1e-12);
        // Normal equations hold on T.
        let grad = p.gradient(&z);
        assert!(grad[2].abs() < 1e-10 && grad[5].abs() < 1e-10);
    }

    #[test]
    fn lambda_s_examples() {
        let id = identity_cs(&[0.0; 4]);
        assert_relative_eq!(id.lambda_s(2).unwrap(), 1.0, epsilon = 1e-12);

        // Two identical columns make the 2-column Gram singular.
        let a = dmatrix![1.0, 1.0, 0.0; 0.0, 0.0, 1.0];
        let p = CsProblem::new(a, dvector![0.0, 0.0]).unwrap();
        assert!(p.lambda_s(2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lambda_s_guard_trips_on_large_enumerations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(4, 300, |_, _| rng.random::<f64>() - 0.5);
        let p = CsProblem::new(a, DVector::zeros(4)).unwrap();
        assert!(matches!(
            p.lambda_s(4),
            Err(Error::CombinatorialGuard { .. })
        ));
    }

    #[test]
    fn qcs_value_examples() {
        let p = QcsProblem::new(dmatrix![1.0], dvector![1.0]).unwrap();
        assert_eq!(p.value(&dvector![2.0]), 2.25);

        // Exact data: f(x*) = 0 and the gradient vanishes.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows = DMatrix::from_fn(5, 4, |_, _| rng.random::<f64>() - 0.5);
        let x_star = dvector![1.0, 0.0, -2.0, 0.0];
        let b = DVector::from_iterator(5, (&rows * &x_star).iter().map(|t| t * t));
        let p = QcsProblem::new(rows, b.clone()).unwrap();
        assert!(p.value(&x_star) < 1e-30);
        assert!(p.gradient(&x_star).norm() < 1e-14);

        // At the origin the value is (1/4m) sum b_i^2 and the gradient is 0.
        let at0 = p.value(&DVector::zeros(4));
        assert_relative_eq!(at0, b.norm_squared() / 20.0, epsilon = 1e-14);
        assert_eq!(p.gradient(&DVector::zeros(4)), DVector::zeros(4));
    }

    #[test]
    fn qcs_gradient_example_value() {
        let p = QcsProblem::new(dmatrix![1.0], dvector![1.0]).unwrap();
        assert_eq!(p.gradient(&dvector![2.0])[0], 6.0);
    }

    #[test]
    fn qcs_hessian_example_and_signs() {
        let p = QcsProblem::new(dmatrix![1.0], dvector![1.0]).unwrap();
        let gamma = IndexSet::new(vec![0]);
        assert_eq!(p.restricted_hessian(&dvector![2.0], &gamma)[(0, 0)], 11.0);

        // Negative definite at the origin when b > 0 (Newton gets declined
        // there), PSD at exact solutions.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows = DMatrix::from_fn(6, 3, |_, _| rng.random::<f64>() - 0.5);
        let x_star = dvector![0.5, -1.0, 0.0];
        let b = DVector::from_iterator(6, (&rows * &x_star).iter().map(|t| t * t));
        let p = QcsProblem::new(rows, b).unwrap();
        let gamma = IndexSet::new(vec![0, 1, 2]);
        let h0 = p.restricted_hessian(&DVector::zeros(3), &gamma);
        assert!(h0.symmetric_eigenvalues().max() < 0.0);
        let hstar = p.restricted_hessian(&x_star, &gamma);
        assert!(hstar.symmetric_eigenvalues().min() >= -1e-12);
    }

    /// Central finite differences of f, the oracle the analytic gradient is
    /// gated on.
    fn fd_gradient(obj: &dyn Objective, x: &DenseVector, h: f64) -> DenseVector {
        let n = x.len();
        DVector::from_fn(n, |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (obj.value(&xp) - obj.value(&xm)) / (2.0 * h)
        })
    }

    /// Central finite differences of the gradient, restricted to `gamma`.
    fn fd_restricted_hessian(
        obj: &dyn Objective,
        x: &DenseVector,
        gamma: &IndexSet,
        h: f64,
    ) -> DMatrix<f64> {
        let s = gamma.len();
        let mut out = DMatrix::zeros(s, s);
        for (col, &j) in gamma.iter().enumerate() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let gp = obj.gradient(&xp);
            let gm = obj.gradient(&xm);
            for (row, &i) in gamma.iter().enumerate() {
                out[(row, col)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = DMatrix::from_fn(9, 6, |_, _| rng.random::<f64>() - 0.5);
        let b = DVector::from_fn(9, |_, _| rng.random::<f64>() - 0.5);
        let cs = CsProblem::new(a.clone(), b.clone()).unwrap();
        let qcs = QcsProblem::new(a, b.map(|v| v.abs())).unwrap();

        for trial in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
            let x = DVector::from_fn(6, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            for obj in [&cs as &dyn Objective, &qcs as &dyn Objective] {
                let g = obj.gradient(&x);
                let fd = fd_gradient(obj, &x, 1e-6);
                for i in 0..6 {
                    assert!(
                        (g[i] - fd[i]).abs() <= 1e-5 * (1.0 + g[i].abs()),
                        "coordinate {i}: analytic {} vs fd {}",
                        g[i],
                        fd[i]
                    );
                }
            }
        }
    }

    #[test]
    fn qcs_hessian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows = DMatrix::from_fn(7, 5, |_, _| rng.random::<f64>() - 0.5);
        let b = DVector::from_fn(7, |_, _| rng.random::<f64>());
        let p = QcsProblem::new(rows, b).unwrap();
        let gamma = IndexSet::new(vec![0, 2, 4]);
        let x = DVector::from_fn(5, |i, _| (i as f64 * 0.3).sin());
        let h = p.restricted_hessian(&x, &gamma);
        let fd = fd_restricted_hessian(&p, &x, &gamma, 1e-5);
        for i in 0..3 {
            for j in 0..3 {
                let denom = 1.0f64.max(h[(i, j)].abs());
                assert!(
                    (h[(i, j)] - fd[(i, j)]).abs() / denom < 1e-4,
                    "entry ({i},{j}): {} vs {}",
                    h[(i, j)],
                    fd[(i, j)]
                );
            }
        }
    }

    #[test]
    fn cs_hessian_is_constant_in_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = DMatrix::from_fn(8, 5, |_, _| rng.random::<f64>() - 0.5);
        let p = CsProblem::new(a.clone(), DVector::zeros(8)).unwrap();
        let gram = a.tr_mul(&a);
        for trial in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(200 + trial);
            let x = DVector::from_fn(5, |_, _| rng.random::<f64>() - 0.5);
            let y = DVector::from_fn(5, |_, _| rng.random::<f64>() - 0.5);
            let lhs = p.gradient(&x) - p.gradient(&y);
            let rhs = &gram * (&x - &y);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn constructors_reject_bad_data() {
        assert!(CsProblem::new(dmatrix![1.0, f64::NAN], dvector![1.0]).is_err());
        assert!(CsProblem::new(dmatrix![1.0, 2.0], dvector![1.0, 2.0]).is_err());
        assert!(QcsProblem::new(dmatrix![f64::INFINITY], dvector![1.0]).is_err());
    }
}
