//! Direct dense reference computations: minimum-norm least squares,
//! orthogonal projections onto `range(A)` and `null(A^T)`, and a spectral
//! summary. Correctness grade, `O(m n^2)`; used for problem construction,
//! rate bounds and ground truth in tests.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::la::{self, check_len, DenseMatrix};

/// Householder QR with column pivoting, `A P = Q R`.
///
/// `factors` holds `R` on and above the diagonal and the essential part of
/// each Householder vector below it (LAPACK `geqp3` layout, column-major).
#[derive(Debug, Clone)]
pub struct PivotedQr {
    m: usize,
    n: usize,
    factors: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DenseMatrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut f = a.data().to_vec();
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..steps {
            // pivot: largest trailing column norm
            let (p, _) = (k..n)
                .map(|j| (j, la::norm_sq(&f[j * m + k..(j + 1) * m])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for i in 0..m {
                    f.swap(k * m + i, p * m + i);
                }
                perm.swap(k, p);
            }
            let (t, beta) = householder(&mut f[k * m + k..(k + 1) * m]);
            tau[k] = t;
            if t != 0.0 {
                let (head, tail) = f.split_at_mut((k + 1) * m);
                let v = &head[k * m + k..(k + 1) * m];
                for col in tail.chunks_exact_mut(m) {
                    reflect(v, t, &mut col[k..]);
                }
            }
            f[k * m + k] = beta;
        }

        let r00 = if steps > 0 { f[0].abs() } else { 0.0 };
        let tol = r00 * m.max(n) as f64 * f64::EPSILON;
        let rank = (0..steps).take_while(|&k| f[k * m + k].abs() > tol).count();
        Self {
            m,
            n,
            factors: f,
            tau,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Column permutation: position `j` of `A P` is column `perm[j]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        self.factors[j * self.m + i]
    }

    /// `Q^T z` in place.
    fn apply_qt(&self, z: &mut [f64]) {
        for (k, &t) in self.tau.iter().enumerate() {
            if t != 0.0 {
                let v = &self.factors[k * self.m + k..(k + 1) * self.m];
                reflect(v, t, &mut z[k..]);
            }
        }
    }

    /// Minimum-norm minimizer of `||A w - z||`.
    pub fn solve_min_norm(&self, z: &[f64]) -> Vec<f64> {
        let (m, n, r) = (self.m, self.n, self.rank);
        let mut c = z.to_vec();
        self.apply_qt(&mut c);
        let mut w = vec![0.0; n];
        if r == 0 {
            return w;
        }

        let y = if r == n {
            let mut y = c[..n].to_vec();
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|j| self.r(i, j) * y[j]).sum();
                y[i] = (y[i] - s) / self.r(i, i);
            }
            y
        } else {
            // [R11 R12] is wide: factor its transpose (n x r) as Z [T; 0] and
            // take y = Z [T^-T c; 0].
            let mut t = vec![0.0; n * r];
            for i in 0..r {
                for j in i..n {
                    t[i * n + j] = self.r(i, j);
                }
            }
            let mut ztau = vec![0.0; r];
            for k in 0..r {
                let (zt, beta) = householder(&mut t[k * n + k..(k + 1) * n]);
                ztau[k] = zt;
                if zt != 0.0 {
                    let (head, tail) = t.split_at_mut((k + 1) * n);
                    let v = &head[k * n + k..(k + 1) * n];
                    for col in tail.chunks_exact_mut(n) {
                        reflect(v, zt, &mut col[k..]);
                    }
                }
                t[k * n + k] = beta;
            }
            // T^T u = c[..r], T^T lower triangular
            let mut u = vec![0.0; n];
            for i in 0..r {
                let s: f64 = (0..i).map(|j| t[i * n + j] * u[j]).sum();
                u[i] = (c[i] - s) / t[i * n + i];
            }
            for k in (0..r).rev() {
                if ztau[k] != 0.0 {
                    let v = &t[k * n + k..(k + 1) * n];
                    reflect(v, ztau[k], &mut u[k..]);
                }
            }
            u
        };
        debug_assert!(m >= r);
        for (j, &p) in self.perm.iter().enumerate() {
            w[p] = y[j];
        }
        w
    }
}

/// Householder reflector for `x` in place: on return `x[1..]` holds the
/// essential vector (implicit leading 1). Returns `(tau, beta)` with
/// `(I - tau v v^T) x = beta e_1`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let sigma = la::norm_sq(&x[1..]);
    if sigma == 0.0 {
        return (0.0, alpha);
    }
    let mu = (alpha * alpha + sigma).sqrt();
    let beta = if alpha <= 0.0 { mu } else { -mu };
    let scale = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    ((beta - alpha) / beta, beta)
}

/// `y <- (I - tau v v^T) y` with `v = [1, ess[1..]]`.
fn reflect(ess: &[f64], tau: f64, y: &mut [f64]) {
    let mut w = y[0];
    for (vi, yi) in ess[1..].iter().zip(&y[1..]) {
        w += vi * yi;
    }
    w *= tau;
    y[0] -= w;
    for (vi, yi) in ess[1..].iter().zip(&mut y[1..]) {
        *yi -= w * vi;
    }
}

/// Minimum-Euclidean-norm minimizer of `||A w - z||`.
pub fn direct_lsq(a: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    check_len("projection operand", a.rows(), z.len())?;
    Ok(PivotedQr::new(a).solve_min_norm(z))
}

/// Orthogonal projection of `z` onto `range(A)`.
pub fn project_range(a: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    let w = direct_lsq(a, z)?;
    a.matvec(&w)
}

/// Orthogonal projection of `z` onto `null(A^T)`.
pub fn project_null_t(a: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    let pr = project_range(a, z)?;
    Ok(z.iter().zip(&pr).map(|(zi, pi)| zi - pi).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Smallest singular value above the rank tolerance.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    pub frob_norm_sq: f64,
    /// All singular values, descending, clamped at zero.
    pub singular_values: Vec<f64>,
}

/// Singular values from a symmetric eigen-solve of the smaller Gram matrix.
///
/// A singular value counts toward the rank when
/// `sigma^2 > sigma_max^2 * max(m, n) * eps`: the Gram eigenvalues carry an
/// absolute error of order `eps * sigma_max^2`, so the cut is applied in the
/// squared domain. Reliable while `sigma_min / sigma_max` stays above ~1e-7.
pub fn spectral_summary(a: &DenseMatrix) -> Result<SpectralSummary> {
    let (m, n) = (a.rows(), a.cols());
    let gram = if n <= m {
        let mut g = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = la::dot(a.column(i), a.column(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    } else {
        let mut g = DMatrix::<f64>::zeros(m, m);
        for j in 0..n {
            let col = a.column(j);
            for p in 0..m {
                for q in 0..=p {
                    g[(p, q)] += col[p] * col[q];
                }
            }
        }
        for p in 0..m {
            for q in 0..p {
                g[(q, p)] = g[(p, q)];
            }
        }
        g
    };

    let mut lambdas: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .collect();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    let lambda_max = lambdas[0];
    if lambda_max == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cut = lambda_max * m.max(n) as f64 * f64::EPSILON;
    let rank = lambdas.iter().take_while(|&&l| l > cut).count();
    let singular_values: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok(SpectralSummary {
        sigma_min: singular_values[rank - 1],
        sigma_max: singular_values[0],
        rank,
        frob_norm_sq: a.frobenius_norm_sq(),
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inconsistent_system() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 9.0], [4.0, 36.0], [13.0, 118.0]]).unwrap()
    }

    #[test]
    fn lsq_of_inconsistent_fixture() {
        let w = direct_lsq(&inconsistent_system(), &[0.0, 42.5, 131.0]).unwrap();
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-9);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-9);
    }

    #[test]
    fn lsq_of_square_fixture() {
        let a = DenseMatrix::from_rows(&[[5.0, 45.0], [9.0, 80.0]]).unwrap();
        let w = direct_lsq(&a, &[50.0, 89.0]).unwrap();
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-10);
    }

    #[test]
    fn lsq_identity_returns_rhs() {
        let a = DenseMatrix::identity(3).unwrap();
        let w = direct_lsq(&a, &[1.5, -2.0, 7.0]).unwrap();
        for (wi, zi) in w.iter().zip([1.5, -2.0, 7.0]) {
            assert_relative_eq!(*wi, zi, max_relative = 1e-15);
        }
    }

    #[test]
    fn lsq_rank_deficient_is_min_norm() {
        // columns 0 and 1 equal: min-norm solution splits weight evenly
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        let qr = PivotedQr::new(&a);
        assert_eq!(qr.rank(), 1);
        let w = qr.solve_min_norm(&[1.0, 2.0]);
        assert_relative_eq!(w[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(w[1], 0.5, max_relative = 1e-12);

        // underdetermined full row rank: w = A^T (A A^T)^{-1} z
        let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0]]).unwrap();
        let w = direct_lsq(&a, &[2.0]).unwrap();
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-12);
        assert_eq!(w[1], 0.0);
        assert_relative_eq!(w[2], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn projections_of_inconsistent_fixture() {
        let a = inconsistent_system();
        let b = [0.0, 42.5, 131.0];
        let ba = project_range(&a, &b).unwrap();
        let bn = project_null_t(&a, &b).unwrap();
        for (x, y) in ba.iter().zip([10.0, 40.0, 131.0]) {
            assert_relative_eq!(*x, y, epsilon = 1e-9);
        }
        for (x, y) in bn.iter().zip([-10.0, 2.5, 0.0]) {
            assert_relative_eq!(*x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn projections_of_range_and_zero_vectors() {
        let a = inconsistent_system();
        let z = a.matvec(&[1.0, 1.0]).unwrap();
        let bn = project_null_t(&a, &z).unwrap();
        assert!(la::norm(&bn) <= 1e-10 * la::norm(&z));
        assert_eq!(project_range(&a, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(project_null_t(&a, &[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn spectral_identity() {
        let s = spectral_summary(&DenseMatrix::identity(2).unwrap()).unwrap();
        assert_relative_eq!(s.sigma_min, 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.sigma_max, 1.0, max_relative = 1e-14);
        assert_eq!(s.rank, 2);
        assert_eq!(s.frob_norm_sq, 2.0);
    }

    #[test]
    fn spectral_first_fixture() {
        let a = DenseMatrix::from_rows(&[[5.0, 45.0], [9.0, 80.0]]).unwrap();
        let s = spectral_summary(&a).unwrap();
        // sigma_min^2 + sigma_max^2 = 8531, sigma_min * sigma_max = |det| = 5
        let disc = (8531.0f64 * 8531.0 - 100.0).sqrt();
        let smax = ((8531.0 + disc) / 2.0).sqrt();
        let smin = 5.0 / smax;
        assert_relative_eq!(s.sigma_max, smax, max_relative = 1e-12);
        assert_relative_eq!(s.sigma_min, smin, max_relative = 1e-6);
        assert_relative_eq!(s.sigma_min, 0.0541, epsilon = 1e-4);
        assert_relative_eq!(s.sigma_max, 92.36, epsilon = 1e-2);
        assert_eq!(s.frob_norm_sq, 8531.0);
    }

    #[test]
    fn spectral_rank_one() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let s = spectral_summary(&a).unwrap();
        assert_eq!(s.rank, 1);
        assert_relative_eq!(s.sigma_min, 5.0, max_relative = 1e-12);
        assert_relative_eq!(s.sigma_max, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn spectral_wide_matrix_uses_row_gram() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        let s = spectral_summary(&a).unwrap();
        assert_eq!(s.rank, 2);
        assert_eq!(s.singular_values.len(), 2);
        assert_relative_eq!(s.sigma_max, 2.0, max_relative = 1e-14);
        assert_relative_eq!(s.sigma_min, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn spectral_zero_matrix() {
        let a = DenseMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(spectral_summary(&a), Err(Error::ZeroMatrix));
    }
}
