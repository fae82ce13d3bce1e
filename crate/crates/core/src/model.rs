//! Domain types shared across the crate.
//!
//! Everything here is immutable after construction. Constructors validate
//! their invariants so downstream code can rely on them without rechecking.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Absolute per-entry tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// A true p x p covariance matrix `M` with its scale and sphericity measures.
///
/// * `eta = tr(M)/p` (average eigenvalue)
/// * `eta2 = tr(M^2)/p`
/// * `gamma = eta2/eta^2 = p tr(M^2)/tr(M)^2`, which is `>= 1` with
///   equality iff `M` is a multiple of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    matrix: DMatrix<f64>,
    cholesky: DMatrix<f64>,
    eta: f64,
    eta2: f64,
    gamma: f64,
}

impl CovarianceModel {
    /// Validates and wraps `matrix`.
    ///
    /// Asymmetry below [`SYMMETRY_TOLERANCE`] is removed by replacing the
    /// input with `(A + A^T)/2`; anything larger is rejected.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for i in 0..rows {
            for j in 0..cols {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, column: j });
                }
            }
        }
        for i in 0..rows {
            for j in (i + 1)..cols {
                let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if gap > SYMMETRY_TOLERANCE {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap,
                    });
                }
            }
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let cholesky = matrix
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();

        let p = rows as f64;
        let trace = matrix.trace();
        // M symmetric, so tr(M^2) is the squared Frobenius norm.
        let trace_sq = matrix.norm_squared();
        let eta = trace / p;
        let eta2 = trace_sq / p;
        Ok(Self {
            gamma: p * trace_sq / (trace * trace),
            matrix,
            cholesky,
            eta,
            eta2,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular `L` with `L L^T = M`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.cholesky
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `||M||_F^2 = p * eta2`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.dim() as f64 * self.eta2
    }
}

/// `n` observations of a `p`-variate population, one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        let (n, p) = rows.shape();
        if n == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if p == 0 {
            return Err(Error::Domain("data matrix has no columns".into()));
        }
        for (idx, v) in rows.iter().enumerate() {
            if !v.is_finite() {
                // column-major storage
                return Err(Error::NonFinite {
                    row: idx % n,
                    column: idx / n,
                });
            }
        }
        Ok(Self { rows })
    }

    /// Builds a data matrix from row slices of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Domain(format!(
                "row {bad} has {} entries, expected {p}",
                rows[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn p(&self) -> usize {
        self.rows.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.rows
    }

    /// Returns a copy with every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.rows * c)
    }
}

/// The `(alpha, beta)` pair of a regularized SCM `beta*S + alpha*I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageParams {
    alpha: f64,
    beta: f64,
}

impl ShrinkageParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Plain SCM: `alpha = 0`, `beta = 1`.
    pub const fn identity() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Plug-in estimates of the quantities the oracle parameters depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericityStats {
    pub eta_hat: f64,
    pub eta2_hat: f64,
    /// Sign-SCM based sphericity estimate, unclamped.
    pub gamma_hat: f64,
    /// Clamped average marginal kurtosis.
    pub kappa_hat: f64,
}

/// Sampling family of an elliptical population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gaussian,
    /// Multivariate t with `nu > 4` degrees of freedom.
    StudentT {
        nu: f64,
    },
}

impl Family {
    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu > 4.0 && nu.is_finite()) {
            return Err(Error::Domain(format!(
                "Student-t needs nu > 4 for finite fourth moments, got {nu}"
            )));
        }
        Ok(Family::StudentT { nu })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Gaussian => Ok(()),
            Family::StudentT { nu } => Family::student_t(nu).map(|_| ()),
        }
    }
}

/// An elliptical population `E_p(0, M, g)` whose covariance is exactly `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalSpec {
    family: Family,
    covariance: CovarianceModel,
}

impl EllipticalSpec {
    pub fn new(family: Family, covariance: CovarianceModel) -> Result<Self> {
        family.validate()?;
        Ok(Self { family, covariance })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn covariance(&self) -> &CovarianceModel {
        &self.covariance
    }
}
