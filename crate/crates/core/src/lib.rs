//! Shrinkage covariance estimation for high-dimensional elliptical data.
//!
//! The crate provides the regularized sample covariance matrix
//! `beta*S + alpha*I` with three ways of choosing `(alpha, beta)`:
//!
//! * the MSE-optimal oracle values, for a known covariance and kurtosis
//!   ([`shrinkage::oracle_params_general`], [`shrinkage::oracle_params_elliptical`]);
//! * the Ledoit-Wolf plug-in ([`shrinkage::lw_params`]);
//! * the Ell-RSCM plug-in, which estimates sphericity from the sign
//!   covariance matrix and kurtosis from the marginals ([`shrinkage::ell_params`]).
//!
//! [`sampling`] builds the benchmark covariance models and draws Gaussian and
//! multivariate-t samples from seeded, independent streams; [`oracle`] holds
//! the closed-form SCM moments; [`bench`] runs the Monte Carlo NMSE study.

pub mod bench;
pub mod error;
pub mod model;
pub mod oracle;
pub mod sampling;
pub mod shrinkage;
pub mod statistics;

pub use error::{Error, Result};
pub use model::{
    CovarianceModel, DataMatrix, EllipticalSpec, Family, ShrinkageParams, SphericityStats,
};
pub use sampling::RngStream;
pub use shrinkage::{estimate, LwNormalization, Method};

pub use nalgebra::DMatrix;
