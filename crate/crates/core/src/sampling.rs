//! Covariance factories and seeded elliptical samplers.
//!
//! Random numbers come from ChaCha8 keyed by a master seed, with the
//! stream index selecting an independent keystream. Constructing a stream is
//! O(1), so every Monte Carlo trial can own its generator and the output does
//! not depend on which worker runs it.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{CovarianceModel, DataMatrix, EllipticalSpec, Family};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// AR(1) covariance `[M]_ij = rho^|i-j|`.
pub fn make_ar1(p: usize, rho: f64) -> Result<CovarianceModel> {
    if p == 0 {
        return Err(Error::Domain("AR(1) dimension must be positive".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "AR(1) rho must lie in (0, 1), got {rho}"
        )));
    }
    let m = DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32));
    CovarianceModel::new(m)
}

/// Diagonal covariance with the given `(eigenvalue, multiplicity)` blocks, in order.
pub fn make_spiked(spectrum: &[(f64, usize)]) -> Result<CovarianceModel> {
    if let Some(&(value, _)) = spectrum.iter().find(|(v, _)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "eigenvalues must be positive, got {value}"
        )));
    }
    if spectrum.iter().any(|&(_, mult)| mult == 0) {
        return Err(Error::Domain(
            "eigenvalue multiplicities must be positive".into(),
        ));
    }
    let diag: Vec<f64> = spectrum
        .iter()
        .flat_map(|&(value, mult)| std::iter::repeat_n(value, mult))
        .collect();
    if diag.is_empty() {
        return Err(Error::Domain("spectrum is empty".into()));
    }
    CovarianceModel::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Standard normal n x p matrix, filled row by row so that a prefix of rows
/// is independent of how many rows are drawn.
fn standard_normal_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let mut z = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = StandardNormal.sample(rng);
        }
    }
    z
}

/// `n` i.i.d. draws from `N_p(0, M)` as `x_i = L z_i`.
pub fn sample_gaussian(model: &CovarianceModel, n: usize, stream: RngStream) -> Result<DataMatrix> {
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut rng = stream.rng();
    let z = standard_normal_rows(&mut rng, n, model.dim());
    DataMatrix::new(z * model.cholesky_factor().transpose())
}

/// `n` i.i.d. multivariate-t draws with covariance exactly `M`.
///
/// Each row is `sqrt((nu-2)/nu) * L z / sqrt(s/nu)` with `s ~ chi2(nu)`
/// drawn after the row's normals.
pub fn sample_student_t(
    model: &CovarianceModel,
    nu: f64,
    n: usize,
    stream: RngStream,
) -> Result<DataMatrix> {
    Family::student_t(nu)?;
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let p = model.dim();
    let chi2 = ChiSquared::new(nu).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = stream.rng();
    let mut z = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = StandardNormal.sample(&mut rng);
        }
        let s: f64 = chi2.sample(&mut rng);
        let scale = ((nu - 2.0) / s).sqrt();
        for j in 0..p {
            z[(i, j)] *= scale;
        }
    }
    DataMatrix::new(z * model.cholesky_factor().transpose())
}

/// Draws `n` observations from `spec`.
pub fn sample(spec: &EllipticalSpec, n: usize, stream: RngStream) -> Result<DataMatrix> {
    match spec.family() {
        Family::Gaussian => sample_gaussian(spec.covariance(), n, stream),
        Family::StudentT { nu } => sample_student_t(spec.covariance(), nu, n, stream),
    }
}

/// Elliptical kurtosis `kappa = E[r^4]/(p(p+2)) - 1` of the family.
pub fn family_kurtosis(family: Family) -> f64 {
    match family {
        Family::Gaussian => 0.0,
        Family::StudentT { nu } => 2.0 / (nu - 4.0),
    }
}

pub fn elliptical_kurtosis(spec: &EllipticalSpec) -> f64 {
    family_kurtosis(spec.family())
}
