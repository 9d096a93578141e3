//! Quadratic finite elements for `u_t - Δu = b χ_D` on the unit disc in
//! polar coordinates, with homogeneous Dirichlet data and zero initial
//! state.

mod assembly;
mod flux;
mod mesh;
mod response;
mod stepping;

use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;
use thiserror::Error;

pub use assembly::{assemble, assemble_load, FemMatrices, LoadPoint, LoadQuadrature, DEFAULT_LOAD_POINTS};
pub use flux::{apply_probe, boundary_flux, flux_probe, write_flux_csv, FieldHistory, FluxSample};
pub use mesh::{gauss_legendre, Element, PolarMesh};
pub use response::{LinearFluxMap, ObservationPoint, ResponseRows};
pub use stepping::{FieldState, StepOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("system matrix is singular or not positive definite")]
    Singular,
}

pub(crate) fn to_dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] += v;
    }
    d
}

/// Smallest `count` eigenvalues of `K x = λ M x` on the interior unknowns.
///
/// Dense; intended for diagnostics on meshes of a few thousand unknowns.
pub fn generalized_eigenvalues(mats: &FemMatrices, count: usize) -> Result<Vec<f64>, FemError> {
    let m = to_dense(&mats.mass);
    let k = to_dense(&mats.stiffness);
    let chol = m.cholesky().ok_or(FemError::Singular)?;
    let l = chol.l();
    let linv_k = l.solve_lower_triangular(&k).ok_or(FemError::Singular)?;
    let a = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or(FemError::Singular)?;
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    Ok(ev)
}

/// Smallest eigenvalue of the interior mass matrix.
pub fn min_mass_eigenvalue(mats: &FemMatrices) -> f64 {
    to_dense(&mats.mass)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
