//! Sample statistics: the SCM, the sign SCM, and the plug-in estimators of
//! scale, sphericity and elliptical kurtosis.
//!
//! Moments are raw (uncentered), matching the zero-mean population model.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{DataMatrix, SphericityStats};

/// `S = (1/n) sum_i x_i x_i^T`.
pub fn scm(x: &DataMatrix) -> DMatrix<f64> {
    let rows = x.as_matrix();
    let mut s = rows.tr_mul(rows) / x.n() as f64;
    symmetrize(&mut s);
    s
}

/// `S_sgn = (1/n) sum_i x_i x_i^T / ||x_i||^2`, which has unit trace.
pub fn sign_scm(x: &DataMatrix) -> Result<DMatrix<f64>> {
    let mut u = x.as_matrix().clone();
    for (i, mut row) in u.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNormRow { row: i });
        }
        row /= norm;
    }
    let mut s = u.tr_mul(&u) / x.n() as f64;
    symmetrize(&mut s);
    Ok(s)
}

// gemm results can differ in the last bit across the diagonal
fn symmetrize(s: &mut DMatrix<f64>) {
    let p = s.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.tr_dot(b)
}

/// `tr(S)/p`.
pub fn eta_hat(s: &DMatrix<f64>) -> f64 {
    s.trace() / s.nrows() as f64
}

/// `tr(S^2)/p`.
pub fn eta2_hat(s: &DMatrix<f64>) -> f64 {
    trace_of_product(s, s) / s.nrows() as f64
}

/// Sign-SCM sphericity estimate `p tr(S_sgn^2) - p/n`.
///
/// Returned unclamped; finite samples can fall below 1.
pub fn gamma_hat_sign(x: &DataMatrix) -> Result<f64> {
    let s_sgn = sign_scm(x)?;
    let p = x.p() as f64;
    Ok(p * trace_of_product(&s_sgn, &s_sgn) - p / x.n() as f64)
}

/// Plug-in sphericity `eta2_hat / eta_hat^2 = p tr(S^2)/tr(S)^2`.
pub fn gamma_hat_plugin(s: &DMatrix<f64>) -> f64 {
    let eta = eta_hat(s);
    eta2_hat(s) / (eta * eta)
}

/// Lower bound `-2/(p+2)` of the elliptical kurtosis in dimension `p`.
pub fn kappa_lower_bound(p: usize) -> f64 {
    -2.0 / (p as f64 + 2.0)
}

/// Average marginal excess kurtosis divided by three, clamped below at
/// `-2/(p+2)`.
pub fn kappa_hat(x: &DataMatrix) -> Result<f64> {
    let rows = x.as_matrix();
    let n = x.n() as f64;
    let p = x.p();
    let mut total = 0.0;
    for (j, col) in rows.column_iter().enumerate() {
        let (m2, m4) = col.iter().fold((0.0, 0.0), |(m2, m4), &v| {
            let sq = v * v;
            (m2 + sq, m4 + sq * sq)
        });
        let (m2, m4) = (m2 / n, m4 / n);
        if m2 == 0.0 {
            return Err(Error::ZeroVarianceColumn { column: j });
        }
        total += m4 / (m2 * m2) - 3.0;
    }
    Ok((total / (3.0 * p as f64)).max(kappa_lower_bound(p)))
}

/// All plug-in statistics used by the Ell-RSCM estimator.
pub fn sphericity_stats(x: &DataMatrix) -> Result<SphericityStats> {
    let s = scm(x);
    Ok(SphericityStats {
        eta_hat: eta_hat(&s),
        eta2_hat: eta2_hat(&s),
        gamma_hat: gamma_hat_sign(x)?,
        kappa_hat: kappa_hat(x)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn data(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn scm_hand_examples() {
        assert_eq!(scm(&data(&[&[1.0, 0.0]])), dmatrix![1.0, 0.0; 0.0, 0.0]);
        assert_eq!(
            scm(&data(&[&[1.0, 1.0], &[-1.0, -1.0]])),
            dmatrix![1.0, 1.0; 1.0, 1.0]
        );
    }

    #[test]
    fn sign_scm_hand_examples() {
        let s = sign_scm(&data(&[&[3.0, 4.0]])).unwrap();
        let expected = dmatrix![9.0, 12.0; 12.0, 16.0] / 25.0;
        assert!((s - expected).abs().max() < 1e-15);

        let s = sign_scm(&data(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(s, dmatrix![0.5, 0.0; 0.0, 0.5]);
    }

    #[test]
    fn sign_scm_zero_row() {
        let err = sign_scm(&data(&[&[1.0, 2.0], &[0.0, 0.0], &[1.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::ZeroNormRow { row: 1 }));
        assert!(matches!(
            gamma_hat_sign(&data(&[&[0.0, 0.0]])),
            Err(Error::ZeroNormRow { row: 0 })
        ));
    }

    #[test]
    fn gamma_hat_hand_examples() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let x = data(&[&e1, &e1, &e1, &e1]);
        assert!((gamma_hat_sign(&x).unwrap() - 3.0).abs() < 1e-15);

        let x = data(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(gamma_hat_sign(&x).unwrap(), 0.0);
    }

    #[test]
    fn kappa_hat_clamped_at_lower_bound() {
        let x = data(&[&[1.0, 1.0], &[-1.0, -1.0], &[1.0, 1.0], &[-1.0, -1.0]]);
        assert_eq!(kappa_hat(&x).unwrap(), -0.5);
        // p = 10: raw value -2/3 is below -2/12 as well
        let row = [1.0; 10];
        let neg = [-1.0; 10];
        let x = data(&[&row, &neg, &row, &neg]);
        assert!((kappa_hat(&x).unwrap() - kappa_lower_bound(10)).abs() < 1e-15);
    }

    #[test]
    fn kappa_hat_zero_column() {
        let x = data(&[&[1.0, 0.0, 2.0], &[2.0, 0.0, 1.0]]);
        assert!(matches!(
            kappa_hat(&x),
            Err(Error::ZeroVarianceColumn { column: 1 })
        ));
    }

    #[test]
    fn eta_examples() {
        let s = DMatrix::identity(3, 3);
        assert_eq!((eta_hat(&s), eta2_hat(&s)), (1.0, 1.0));
        let s = dmatrix![2.0, 0.0; 0.0, 0.0];
        assert_eq!((eta_hat(&s), eta2_hat(&s)), (1.0, 2.0));
        let s = scm(&data(&[&[1.0, 1.0], &[-1.0, -1.0]]));
        assert_eq!((eta_hat(&s), eta2_hat(&s)), (1.0, 2.0));
    }

    #[test]
    fn eta2_hat_on_asymmetric_input() {
        // tr(A^2) = sum_ij a_ij a_ji
        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        assert_eq!(eta2_hat(&a), (1.0 + 2.0 * 6.0 + 16.0) / 2.0);
    }
}
