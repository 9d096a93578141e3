use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::mesh::{gauss_legendre, lagrange2, lagrange2_deriv, PolarMesh};
use crate::shape::ShapeParams;

/// Mass and stiffness matrices of the polar weak form.
///
/// `mass` and `stiffness` are restricted to the interior unknowns; the
/// `*_full` variants include the Dirichlet ring and are kept for
/// diagnostics.
#[derive(Debug, Clone)]
pub struct FemMatrices {
    pub mass: CsrMatrix<f64>,
    pub stiffness: CsrMatrix<f64>,
    pub mass_full: CsrMatrix<f64>,
    pub stiffness_full: CsrMatrix<f64>,
    pub dof_count: usize,
}

/// Assembles `M_ij = ∫∫ φ_j φ_i r dr dθ` and
/// `K_ij = ∫∫ (r ∂_rφ_j ∂_rφ_i + r⁻¹ ∂_θφ_j ∂_θφ_i) dr dθ`
/// with 3×3 Gauss–Legendre quadrature per element.
pub fn assemble(mesh: &PolarMesh) -> FemMatrices {
    let n = mesh.node_count();
    let dofs = mesh.dof_count();
    let gl = gauss_legendre(3);
    let mut m_coo = CooMatrix::new(n, n);
    let mut k_coo = CooMatrix::new(n, n);
    let mut m_int = CooMatrix::new(dofs, dofs);
    let mut k_int = CooMatrix::new(dofs, dofs);

    for e in mesh.elements() {
        let hr = 0.5 * (e.r1 - e.r0);
        let ht = 0.5 * (e.theta1 - e.theta0);
        let mut me = [[0.0; 9]; 9];
        let mut ke = [[0.0; 9]; 9];
        for &(xr, wr) in &gl {
            let r = e.r0 + hr * (xr + 1.0);
            let nr = lagrange2(xr);
            let dnr = lagrange2_deriv(xr).map(|d| d / hr);
            for &(xt, wt) in &gl {
                let nt = lagrange2(xt);
                let dnt = lagrange2_deriv(xt).map(|d| d / ht);
                let w = wr * wt * hr * ht;
                for a in 0..9 {
                    let (ar, at) = (a / 3, a % 3);
                    let phi_a = nr[ar] * nt[at];
                    let dr_a = dnr[ar] * nt[at];
                    let dt_a = nr[ar] * dnt[at];
                    for b in 0..9 {
                        let (br, bt) = (b / 3, b % 3);
                        let phi_b = nr[br] * nt[bt];
                        let dr_b = dnr[br] * nt[bt];
                        let dt_b = nr[br] * dnt[bt];
                        me[a][b] += w * phi_a * phi_b * r;
                        ke[a][b] += w * (r * dr_a * dr_b + dt_a * dt_b / r);
                    }
                }
            }
        }
        for a in 0..9 {
            for b in 0..9 {
                let (i, j) = (e.nodes[a], e.nodes[b]);
                m_coo.push(i, j, me[a][b]);
                k_coo.push(i, j, ke[a][b]);
                if i < dofs && j < dofs {
                    m_int.push(i, j, me[a][b]);
                    k_int.push(i, j, ke[a][b]);
                }
            }
        }
    }

    FemMatrices {
        mass: CsrMatrix::from(&m_int),
        stiffness: CsrMatrix::from(&k_int),
        mass_full: CsrMatrix::from(&m_coo),
        stiffness_full: CsrMatrix::from(&k_coo),
        dof_count: dofs,
    }
}

/// One quadrature point of the load integral with its interior basis weights.
#[derive(Debug, Clone)]
pub struct LoadPoint {
    /// Cartesian position.
    pub xy: [f64; 2],
    /// `(dof, w · r · φ_dof)` pairs for interior unknowns.
    pub weights: Vec<(usize, f64)>,
}

/// Fixed tensor quadrature used to integrate `χ_D φ_i r` element by element.
///
/// `χ_D` is evaluated pointwise, so the table depends only on the mesh and
/// can be reused for every shape.
#[derive(Debug, Clone)]
pub struct LoadQuadrature {
    points: Vec<LoadPoint>,
    dof_count: usize,
}

/// Default points per direction for the load quadrature.
pub const DEFAULT_LOAD_POINTS: usize = 12;

impl LoadQuadrature {
    pub fn new(mesh: &PolarMesh, points_per_dir: usize) -> Self {
        let gl = gauss_legendre(points_per_dir);
        let dofs = mesh.dof_count();
        let mut points = Vec::with_capacity(gl.len() * gl.len() * mesh.n_r() * mesh.n_theta());
        for e in mesh.elements() {
            let hr = 0.5 * (e.r1 - e.r0);
            let ht = 0.5 * (e.theta1 - e.theta0);
            for &(xr, wr) in &gl {
                let r = e.r0 + hr * (xr + 1.0);
                let nr = lagrange2(xr);
                for &(xt, wt) in &gl {
                    let theta = e.theta0 + ht * (xt + 1.0);
                    let nt = lagrange2(xt);
                    let w = wr * wt * hr * ht * r;
                    let weights = (0..9)
                        .filter(|&a| e.nodes[a] < dofs)
                        .map(|a| (e.nodes[a], w * nr[a / 3] * nt[a % 3]))
                        .collect();
                    let (s, c) = theta.sin_cos();
                    points.push(LoadPoint {
                        xy: [r * c, r * s],
                        weights,
                    });
                }
            }
        }
        Self {
            points,
            dof_count: dofs,
        }
    }

    pub fn points(&self) -> &[LoadPoint] {
        &self.points
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// `F_i = b ∫∫ χ_D φ_i r dr dθ` on the interior unknowns.
    pub fn load(&self, shape: &ShapeParams, strength: f64) -> DVector<f64> {
        self.load_with(|p| shape.contains(p), strength)
    }

    pub fn load_with(&self, indicator: impl Fn([f64; 2]) -> bool, strength: f64) -> DVector<f64> {
        let mut f = DVector::zeros(self.dof_count);
        for p in &self.points {
            if indicator(p.xy) {
                for &(i, w) in &p.weights {
                    f[i] += strength * w;
                }
            }
        }
        f
    }
}

/// Convenience wrapper building a fresh quadrature table with the default order.
pub fn assemble_load(mesh: &PolarMesh, shape: &ShapeParams, strength: f64) -> DVector<f64> {
    LoadQuadrature::new(mesh, DEFAULT_LOAD_POINTS).load(shape, strength)
}
