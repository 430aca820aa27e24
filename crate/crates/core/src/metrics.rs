//! Convergence metrics and the theoretical contraction factors of RCD and
//! RGSO.

use crate::error::{Error, Result};
use crate::la::{self, check_len, DenseMatrix};
use crate::oracle::SpectralSummary;

/// Residual relative error `||b_null - r||^2 / ||b||^2`.
pub fn rre(r: &[f64], b_null: &[f64], b: &[f64]) -> Result<f64> {
    check_len("null-space component", r.len(), b_null.len())?;
    check_len("right-hand side", r.len(), b.len())?;
    let bb = la::norm_sq(b);
    if bb == 0.0 {
        return Err(Error::ZeroRhs);
    }
    Ok(la::dist_sq(b_null, r) / bb)
}

/// `delta(x) = ||A (x - x_ref)||^2`, which equals `F(x) - min F` when
/// `x_ref` is a least-squares solution. Computed from the difference to
/// avoid cancellation near convergence.
pub fn error_seminorm_sq(a: &DenseMatrix, x: &[f64], x_ref: &[f64]) -> Result<f64> {
    check_len("iterate", a.cols(), x.len())?;
    check_len("reference", a.cols(), x_ref.len())?;
    let d: Vec<f64> = x.iter().zip(x_ref).map(|(p, q)| p - q).collect();
    Ok(la::norm_sq(&a.matvec(&d)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBounds {
    /// `kappa_F^2(A) = ||A||_F^2 / sigma_min^2`.
    pub kappa_f_sq: f64,
    /// Expected per-step contraction of RCD, `1 - 1/kappa_F^2`.
    pub rcd_factor: f64,
    /// Expected per-step contraction of RGSO, `1 - 1/((n-2)(kappa_F^2 - 1))`.
    /// Absent for `n < 3` and when `kappa_F^2 = 1`.
    pub rgso_factor: Option<f64>,
    pub n: usize,
}

pub fn rate_bounds(a: &DenseMatrix, spectral: &SpectralSummary) -> Result<RateBounds> {
    if !(spectral.sigma_min > 0.0) {
        return Err(Error::DegenerateRank);
    }
    let n = a.cols();
    let kappa_f_sq = spectral.frob_norm_sq / (spectral.sigma_min * spectral.sigma_min);
    let rgso_factor = (n >= 3 && kappa_f_sq > 1.0)
        .then(|| 1.0 - 1.0 / ((n - 2) as f64 * (kappa_f_sq - 1.0)));
    Ok(RateBounds {
        kappa_f_sq,
        rcd_factor: 1.0 - 1.0 / kappa_f_sq,
        rgso_factor,
        n,
    })
}

/// Per-step expected contraction of RGSO on a matrix with unit columns,
/// `1 - sigma_min^2 / ((1 - gamma^2)(||A||_F^2 - 2))` where `gamma` is the
/// smallest `|<A_s, A_cur>|` over `s` outside `{cur, prev}`.
pub fn rgso_step_factor(
    unitized: &DenseMatrix,
    cur: usize,
    prev: usize,
    spectral: &SpectralSummary,
) -> Result<f64> {
    let n = unitized.cols();
    if n < 3 {
        return Err(Error::TooFewColumns { needed: 3, cols: n });
    }
    unitized.check_index(cur)?;
    unitized.check_index(prev)?;
    if cur == prev {
        return Err(Error::SameIndex(cur));
    }
    for j in 0..n {
        if (unitized.column_norm_sq(j) - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitized(j));
        }
    }
    let gamma = (0..n)
        .filter(|&s| s != cur && s != prev)
        .map(|s| la::dot(unitized.column(s), unitized.column(cur)).abs())
        .fold(f64::INFINITY, f64::min);
    if gamma >= 1.0 - 1e-12 {
        return Err(Error::ParallelColumns(cur));
    }
    let sigma_sq = spectral.sigma_min * spectral.sigma_min;
    Ok(1.0 - sigma_sq / ((1.0 - gamma * gamma) * (spectral.frob_norm_sq - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::spectral_summary;
    use approx::assert_relative_eq;

    fn orthonormal_3() -> DenseMatrix {
        let s = 0.5f64.sqrt();
        DenseMatrix::from_rows(&[[s, 0.0, 0.0], [s, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn rre_cases() {
        let b = [0.0, 42.5, 131.0];
        let b_null = [-10.0, 2.5, 0.0];
        assert_eq!(rre(&b_null, &b_null, &b).unwrap(), 0.0);
        assert_eq!(rre(&b, &[0.0; 3], &b).unwrap(), 1.0);
        let v = rre(&b, &b_null, &b).unwrap();
        assert_relative_eq!(v, 18861.0 / 18967.25, max_relative = 1e-14);
        assert_relative_eq!(v, 0.99440, epsilon = 1e-5);
        assert_eq!(rre(&b, &b_null, &[0.0; 3]), Err(Error::ZeroRhs));
    }

    #[test]
    fn rre_shift_cancels() {
        let r = [0.3, -1.0, 2.0];
        let bn = [0.1, 0.2, 0.4];
        let b = [1.0, 2.0, 3.0];
        let w = [0.25, 0.5, -0.75];
        let shift = |v: &[f64]| -> Vec<f64> { v.iter().zip(&w).map(|(a, b)| a + b).collect() };
        assert_eq!(
            rre(&shift(&r), &shift(&bn), &b).unwrap(),
            rre(&r, &bn, &b).unwrap()
        );
    }

    #[test]
    fn error_seminorm_cases() {
        let a = DenseMatrix::from_rows(&[[5.0, 45.0], [9.0, 80.0]]).unwrap();
        assert_eq!(error_seminorm_sq(&a, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let v = error_seminorm_sq(&a, &[1051.0 / 106.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(v, 2650.0 / (106.0 * 106.0), max_relative = 1e-9);
        assert_relative_eq!(v, 0.23585, epsilon = 1e-5);
    }

    #[test]
    fn rate_bounds_identity() {
        let a = DenseMatrix::identity(2).unwrap();
        let rb = rate_bounds(&a, &spectral_summary(&a).unwrap()).unwrap();
        assert_relative_eq!(rb.kappa_f_sq, 2.0, max_relative = 1e-14);
        assert_relative_eq!(rb.rcd_factor, 0.5, max_relative = 1e-14);
        assert_eq!(rb.rgso_factor, None);
    }

    #[test]
    fn rate_bounds_first_fixture() {
        let a = DenseMatrix::from_rows(&[[5.0, 45.0], [9.0, 80.0]]).unwrap();
        let s = spectral_summary(&a).unwrap();
        let rb = rate_bounds(&a, &s).unwrap();
        let expected = 8531.0 * s.sigma_max * s.sigma_max / 25.0;
        assert_relative_eq!(rb.kappa_f_sq, expected, max_relative = 1e-6);
        assert_relative_eq!(rb.kappa_f_sq, 2.911e6, max_relative = 1e-3);
        assert_relative_eq!(1.0 - rb.rcd_factor, 3.435e-7, max_relative = 1e-3);
    }

    #[test]
    fn rate_bounds_orthonormal() {
        let a = orthonormal_3();
        let rb = rate_bounds(&a, &spectral_summary(&a).unwrap()).unwrap();
        assert_relative_eq!(rb.kappa_f_sq, 3.0, max_relative = 1e-12);
        assert_relative_eq!(rb.rgso_factor.unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn rgso_step_factor_orthonormal_is_zero() {
        let a = orthonormal_3();
        let s = spectral_summary(&a).unwrap();
        for (cur, prev) in [(0, 1), (1, 2), (2, 0)] {
            let f = rgso_step_factor(&a, cur, prev, &s).unwrap();
            assert!(f.abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn rgso_step_factor_equiangular_columns() {
        // three unit vectors with pairwise inner product 0.5
        let h = 0.5f64;
        let c = (0.75f64).sqrt();
        let e3 = (1.0 - h * h - (h - h * h) * (h - h * h) / (c * c)).sqrt();
        let a = DenseMatrix::from_rows(&[
            [1.0, h, h],
            [0.0, c, (h - h * h) / c],
            [0.0, 0.0, e3],
        ])
        .unwrap();
        assert_relative_eq!(a.dot_columns(1, 2).unwrap(), 0.5, max_relative = 1e-12);
        let s = spectral_summary(&a).unwrap();
        // Gram = 0.5 I + 0.5 J: eigenvalues 2, 0.5, 0.5
        assert_relative_eq!(s.sigma_min * s.sigma_min, 0.5, max_relative = 1e-10);
        let f = rgso_step_factor(&a, 0, 1, &s).unwrap();
        assert_relative_eq!(
            f,
            1.0 - s.sigma_min * s.sigma_min / 0.75,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rgso_step_factor_rejects_bad_input() {
        let a = DenseMatrix::from_rows(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
            .unwrap();
        let s = spectral_summary(&a).unwrap();
        assert_eq!(rgso_step_factor(&a, 0, 1, &s), Err(Error::NotUnitized(0)));
        let p = DenseMatrix::from_rows(&[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        let s = spectral_summary(&p).unwrap();
        assert_eq!(
            rgso_step_factor(&p, 0, 1, &s),
            Err(Error::ParallelColumns(0))
        );
    }
}
