//! Dirichlet eigenfunction expansion of the disc heat problem.

mod basis;
mod bessel;
mod series;

use thiserror::Error;

pub use basis::{check_uniqueness_condition, norm_by_quadrature, normalization, EigenBasis, EigenPair};
pub use bessel::{bessel_j, bessel_j_all, bessel_zeros, mcmahon, MAX_ORDER, MAX_ZERO_INDEX};
pub use series::{
    flux_series, flux_series_with_derivative, fourier_coeff, fourier_coeff_with, CoeffQuadrature, FourierCoeffs,
    SpectralForward,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero {count} of order {order} is outside the tabulated range")]
    Tabulation { order: usize, count: usize },
    #[error("no sign change of J_{order} on [{lo}, {hi}]")]
    Bracket { order: usize, lo: f64, hi: f64 },
    #[error("flux series has imaginary residual {imag} (real part {real})")]
    ImaginaryResidual { real: f64, imag: f64 },
}
