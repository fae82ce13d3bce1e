//! Regularized SCM estimators `beta*S + alpha*I`.
//!
//! Two families of shrinkage parameters live here: the oracle values, which
//! need the true covariance, and the data-driven plug-in values of the
//! Ledoit-Wolf and Ell-RSCM estimators.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CovarianceModel, DataMatrix, ShrinkageParams, SphericityStats};
use crate::oracle::{check_kappa, dispersion_bracket};
use crate::statistics::{eta2_hat, eta_hat, scm, sphericity_stats};

/// `beta*S + alpha*I`.
pub fn rscm(s: &DMatrix<f64>, params: ShrinkageParams) -> DMatrix<f64> {
    let mut out = s * params.beta();
    for i in 0..out.nrows() {
        out[(i, i)] += params.alpha();
    }
    out
}

/// MSE-optimal parameters for an arbitrary population with finite fourth
/// moments, given `E tr(S^2)`.
pub fn oracle_params_general(
    model: &CovarianceModel,
    expected_tr_s2: f64,
) -> Result<ShrinkageParams> {
    let p = model.dim() as f64;
    let eta = model.eta();
    let floor = p * eta * eta;
    if !(expected_tr_s2 > floor) {
        return Err(Error::DegenerateDenominator {
            expected_tr_s2,
            floor,
        });
    }
    let beta = p * (model.gamma() - 1.0) * eta * eta / (expected_tr_s2 - floor);
    ShrinkageParams::new((1.0 - beta) * eta, beta)
}

/// MSE-optimal parameters for an elliptical population with kurtosis `kappa`.
pub fn oracle_params_elliptical(
    model: &CovarianceModel,
    kappa: f64,
    n: usize,
) -> Result<ShrinkageParams> {
    elliptical_oracle(model.eta(), model.gamma(), kappa, n, model.dim())
}

/// [`oracle_params_elliptical`] from the scalar summaries alone.
pub fn elliptical_oracle(
    eta: f64,
    gamma: f64,
    kappa: f64,
    n: usize,
    p: usize,
) -> Result<ShrinkageParams> {
    if n == 0 || p == 0 {
        return Err(Error::Domain("n and p must be positive".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be >= 1, got {gamma}")));
    }
    check_kappa(kappa, p)?;
    let excess = gamma - 1.0;
    let beta = excess / (excess + dispersion_bracket(gamma, kappa, p) / n as f64);
    ShrinkageParams::new((1.0 - beta) * eta, beta)
}

/// Denominator convention of the Ledoit-Wolf plug-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LwNormalization {
    /// `n (eta2_hat - eta_hat^2)`: the original Ledoit-Wolf form, scale invariant.
    #[default]
    Scaled,
    /// `n (gamma_hat - 1)` with `gamma_hat = eta2_hat/eta_hat^2`, i.e. the
    /// scaled form divided by `eta_hat^2`. Agrees with `Scaled` only when
    /// `eta_hat = 1`.
    Unscaled,
}

/// Ledoit-Wolf parameters together with the degenerate-sphericity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwFit {
    pub params: ShrinkageParams,
    /// `S` is (numerically) proportional to the identity, so the plug-in is
    /// undefined and `beta = 0` was returned.
    pub degenerate: bool,
}

/// Ledoit-Wolf shrinkage parameters with the default normalization.
pub fn lw_params(x: &DataMatrix) -> Result<ShrinkageParams> {
    lw_fit(x, LwNormalization::Scaled).map(|fit| fit.params)
}

pub fn lw_fit(x: &DataMatrix, normalization: LwNormalization) -> Result<LwFit> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let s = scm(x);
    let eta = eta_hat(&s);
    if !(eta > 0.0) {
        return Err(Error::ZeroTrace);
    }
    let eta2 = eta2_hat(&s);
    let spread = eta2 - eta * eta;
    if spread <= f64::EPSILON * eta2 {
        return Ok(LwFit {
            params: ShrinkageParams::new(eta, 0.0)?,
            degenerate: true,
        });
    }

    // sum_i ||x_i x_i^T - S||_F^2 = sum_i ||x_i||^4 - n tr(S^2)
    let fourth: f64 = x
        .as_matrix()
        .row_iter()
        .map(|row| {
            let sq = row.norm_squared();
            sq * sq
        })
        .sum();
    let numerator = fourth / (p * n) as f64 - eta2;
    let denominator = n as f64
        * match normalization {
            LwNormalization::Scaled => spread,
            LwNormalization::Unscaled => spread / (eta * eta),
        };
    let beta = (1.0 - numerator / denominator).clamp(0.0, 1.0);
    Ok(LwFit {
        params: ShrinkageParams::new((1.0 - beta) * eta, beta)?,
        degenerate: false,
    })
}

/// Ell-RSCM plug-in parameters from the sign-SCM sphericity and the clamped
/// marginal kurtosis.
pub fn ell_params(x: &DataMatrix) -> Result<ShrinkageParams> {
    if x.n() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: x.n(),
        });
    }
    let stats = sphericity_stats(x)?;
    ell_params_from_stats(&stats, x.n(), x.p())
}

pub fn ell_params_from_stats(
    stats: &SphericityStats,
    n: usize,
    p: usize,
) -> Result<ShrinkageParams> {
    let gamma = stats.gamma_hat;
    let excess = gamma - 1.0;
    let denominator = excess + dispersion_bracket(gamma, stats.kappa_hat, p) / n as f64;
    let beta = if denominator > 0.0 {
        (excess / denominator).max(0.0)
    } else {
        0.0
    };
    ShrinkageParams::new((1.0 - beta) * stats.eta_hat, beta)
}

/// Estimators selectable through [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Scm,
    Lw,
    Ell,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Scm => "scm",
            Method::Lw => "lw",
            Method::Ell => "ell",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scm" => Ok(Method::Scm),
            "lw" => Ok(Method::Lw),
            "ell" => Ok(Method::Ell),
            other => Err(Error::Domain(format!("unknown method `{other}`"))),
        }
    }
}

/// Fits `method` to `x` and returns the regularized SCM with its parameters.
pub fn estimate(x: &DataMatrix, method: Method) -> Result<(DMatrix<f64>, ShrinkageParams)> {
    let params = match method {
        Method::Scm => ShrinkageParams::identity(),
        Method::Lw => lw_params(x)?,
        Method::Ell => ell_params(x)?,
    };
    Ok((rscm(&scm(x), params), params))
}
