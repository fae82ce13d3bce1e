//! Closed-form second-order theory of the SCM under elliptical sampling.
//!
//! These expressions serve two roles: they give the analytic lower bound the
//! benchmark compares against, and they are test oracles for the Monte Carlo
//! machinery. [`cov_vec_scm`] in particular materializes a p^2 x p^2 matrix
//! and is only meant for small `p`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::CovarianceModel;
use crate::statistics::kappa_lower_bound;

/// Largest `p` accepted by [`cov_vec_scm`].
pub const COV_VEC_MAX_DIM: usize = 50;

/// Second moments of the SCM for an elliptical population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmMoments {
    /// `E ||S - M||_F^2`
    pub mse: f64,
    /// `mse / ||M||_F^2`
    pub nmse: f64,
    /// `E tr(S^2) = mse + p * eta2`
    pub expected_tr_s2: f64,
}

pub(crate) fn check_kappa(kappa: f64, p: usize) -> Result<()> {
    if !(kappa >= kappa_lower_bound(p) && kappa.is_finite()) {
        return Err(Error::Domain(format!(
            "kappa = {kappa} is below the lower bound -2/(p+2) = {}",
            kappa_lower_bound(p)
        )));
    }
    Ok(())
}

/// `{kappa(2 gamma + p) + gamma + p}`, the bracket shared by the MSE of the
/// SCM and the elliptical oracle.
pub(crate) fn dispersion_bracket(gamma: f64, kappa: f64, p: usize) -> f64 {
    let p = p as f64;
    kappa * (2.0 * gamma + p) + gamma + p
}

/// MSE and NMSE of the SCM plus `E tr(S^2)`, from `(eta, gamma, kappa, n, p)`.
pub fn scm_moments(eta: f64, gamma: f64, kappa: f64, n: usize, p: usize) -> Result<ScmMoments> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be >= 1, got {gamma}")));
    }
    if n == 0 || p == 0 {
        return Err(Error::Domain("n and p must be positive".into()));
    }
    check_kappa(kappa, p)?;

    let bracket = dispersion_bracket(gamma, kappa, p);
    let (nf, pf) = (n as f64, p as f64);
    let mse = pf / nf * eta * eta * bracket;
    let nmse = bracket / (gamma * nf);
    let eta2 = gamma * eta * eta;
    Ok(ScmMoments {
        mse,
        nmse,
        expected_tr_s2: mse + pf * eta2,
    })
}

/// MSE of the optimally shrunk SCM, `||M - eta I||_F^2 (1 - beta_o)`.
///
/// `beta_o` is taken as input so the same expression serves both the general
/// and the elliptical oracle.
pub fn optimal_mse(model: &CovarianceModel, beta_o: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta_o) {
        return Err(Error::Domain(format!(
            "beta_o must lie in [0, 1), got {beta_o}"
        )));
    }
    Ok(target_distance_sq(model) * (1.0 - beta_o))
}

/// [`optimal_mse`] divided by `||M||_F^2`: `(gamma - 1)(1 - beta_o)/gamma`.
pub fn optimal_nmse(model: &CovarianceModel, beta_o: f64) -> Result<f64> {
    Ok(optimal_mse(model, beta_o)? / model.frobenius_norm_sq())
}

/// `||M - eta I||_F^2 = p (gamma - 1) eta^2`.
pub fn target_distance_sq(model: &CovarianceModel) -> f64 {
    let eta = model.eta();
    // p(eta2 - eta^2) is exact; p(gamma - 1)eta^2 loses digits near gamma = 1.
    (model.dim() as f64 * (model.eta2() - eta * eta)).max(0.0)
}

/// `K_p` with `K vec(A) = vec(A^T)`, `vec` stacking columns.
pub fn commutation_matrix(p: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(p * p, p * p);
    for i in 0..p {
        for j in 0..p {
            k[(i + j * p, j + i * p)] = 1.0;
        }
    }
    k
}

/// `cov(vec S) = (1+kappa)/n (I + K_p)(M (x) M) + kappa/n vec(M) vec(M)^T`.
pub fn cov_vec_scm(model: &CovarianceModel, kappa: f64, n: usize) -> Result<DMatrix<f64>> {
    let p = model.dim();
    if p > COV_VEC_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            p,
            limit: COV_VEC_MAX_DIM,
        });
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    check_kappa(kappa, p)?;

    let m = model.matrix();
    let mm = m.kronecker(m);
    let p2 = p * p;
    let sym = DMatrix::<f64>::identity(p2, p2) + commutation_matrix(p);
    let vec_m = DMatrix::from_column_slice(p2, 1, m.as_slice());
    let nf = n as f64;
    Ok(sym * mm * ((1.0 + kappa) / nf) + &vec_m * vec_m.transpose() * (kappa / nf))
}
