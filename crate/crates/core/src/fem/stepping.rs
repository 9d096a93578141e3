use nalgebra::{DMatrixViewMut, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CscMatrix, CsrMatrix};

use super::assembly::FemMatrices;
use super::FemError;

/// Coefficients `Uⁿ` on the interior unknowns at time `t`; the Dirichlet
/// ring is implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: DVector<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(dofs: usize) -> Self {
        Self {
            u: DVector::zeros(dofs),
            t: 0.0,
        }
    }
}

/// Backward-Euler propagator with a cached Cholesky factor of `M + Δt K`.
///
/// Immutable after construction; share it between chains by reference.
pub struct StepOperator {
    dt: f64,
    factor: CscCholesky<f64>,
    mass: CsrMatrix<f64>,
}

impl std::fmt::Debug for StepOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepOperator")
            .field("dt", &self.dt)
            .field("dofs", &self.mass.nrows())
            .finish()
    }
}

impl StepOperator {
    pub fn new(mats: &FemMatrices, dt: f64) -> Result<Self, FemError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FemError::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let lhs = &mats.mass + &(&mats.stiffness * dt);
        let csc = CscMatrix::from(&lhs);
        let factor = CscCholesky::factor(&csc).map_err(|_| FemError::Singular)?;
        Ok(Self {
            dt,
            factor,
            mass: mats.mass.clone(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dof_count(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    /// Solves `(M + Δt K) x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut DVector<f64>) {
        let n = rhs.len();
        let view = DMatrixViewMut::from_slice(rhs.as_mut_slice(), n, 1);
        self.factor.solve_mut(view);
    }

    /// Advances `(M + Δt K) Uⁿ = M Uⁿ⁻¹ + Δt F`.
    pub fn step(&self, state: &FieldState, load: &DVector<f64>) -> Result<FieldState, FemError> {
        let mut rhs = &self.mass * &state.u;
        rhs.axpy(self.dt, load, 1.0);
        self.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(FemError::Singular);
        }
        Ok(FieldState {
            u: rhs,
            t: state.t + self.dt,
        })
    }

    /// `Uᵀ M U`.
    pub fn energy(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.mass * u))
    }
}
