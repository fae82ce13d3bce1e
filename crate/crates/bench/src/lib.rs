//! Fixtures shared by the criterion benchmarks.

use ellshrink::sampling::{make_ar1, make_spiked, sample};
use ellshrink::{DataMatrix, EllipticalSpec, Family, RngStream};

/// The heavy-tailed spiked population used for the largest study.
pub fn spiked_t8(p: usize) -> EllipticalSpec {
    let third = p * 3 / 10;
    let model = make_spiked(&[(100.0, third), (1.0, p - 2 * third), (0.01, third)])
        .expect("valid spectrum");
    EllipticalSpec::new(Family::StudentT { nu: 8.0 }, model).expect("nu > 4")
}

pub fn ar1_gaussian(p: usize, rho: f64) -> EllipticalSpec {
    EllipticalSpec::new(Family::Gaussian, make_ar1(p, rho).expect("rho in (0,1)"))
        .expect("gaussian")
}

pub fn draw(spec: &EllipticalSpec, n: usize) -> DataMatrix {
    sample(spec, n, RngStream::new(0xBEEF, 0)).expect("sampling succeeds")
}
