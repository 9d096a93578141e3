//! Precomputed linear response of boundary-flux observations to the source.
//!
//! With a time-constant load `F` and zero initial data the backward-Euler
//! iterates are `Uⁿ = Σ_{j<n} Aʲ Δt L⁻¹ F` with `L = M + Δt K`,
//! `A = L⁻¹ M`. Each observation `ℓ_θᵀ Uⁿ` is therefore `gᵀ F` for a
//! sensitivity vector `g` obtained from one adjoint sweep per probe angle:
//! `μ₀ = L⁻¹ ℓ_θ`, `μ_{j+1} = L⁻¹ M μ_j`, `g(n) = Δt Σ_{j<n} μ_j`.
//! Folding `g` into the load quadrature turns every forward solve into a
//! masked sum over quadrature points.

use std::collections::BTreeMap;

use nalgebra::DVector;

use super::assembly::LoadQuadrature;
use super::flux::{flux_probe, time_bracket};
use super::stepping::StepOperator;
use super::{FemError, PolarMesh};
use crate::shape::ShapeParams;

/// Observation location in `(θ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    pub theta: f64,
    pub t: f64,
}

/// Sensitivity rows `g_i` with `flux_i = g_iᵀ F`.
#[derive(Debug, Clone)]
pub struct ResponseRows {
    rows: Vec<DVector<f64>>,
}

impl ResponseRows {
    pub fn build(mesh: &PolarMesh, op: &StepOperator, points: &[ObservationPoint]) -> Result<Self, FemError> {
        let dt = op.dt();
        // group the needed step indices by probe angle (exact bit pattern)
        let mut by_angle: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        let mut brackets = Vec::with_capacity(points.len());
        for p in points {
            if !(p.t >= 0.0) {
                return Err(FemError::InvalidArgument(format!("negative observation time {}", p.t)));
            }
            let (n, w) = time_bracket(p.t, dt);
            let steps = by_angle.entry(p.theta.to_bits()).or_default();
            steps.push(n);
            if w > 0.0 {
                steps.push(n + 1);
            }
            brackets.push((n, w));
        }

        let dofs = op.dof_count();
        let mut table: BTreeMap<(u64, usize), DVector<f64>> = BTreeMap::new();
        for (bits, mut steps) in by_angle {
            steps.sort_unstable();
            steps.dedup();
            let theta = f64::from_bits(bits);
            let mut mu = DVector::zeros(dofs);
            for (i, w) in flux_probe(mesh, theta) {
                mu[i] += w;
            }
            op.solve_in_place(&mut mu);
            let mut acc = DVector::zeros(dofs);
            let mut next = steps.iter().peekable();
            // acc holds Δt Σ_{j<n} μ_j
            for n in 0..=*steps.last().unwrap() {
                while next.peek() == Some(&&n) {
                    table.insert((bits, n), acc.clone());
                    next.next();
                }
                acc.axpy(dt, &mu, 1.0);
                let mut m_mu = op.mass() * &mu;
                op.solve_in_place(&mut m_mu);
                mu = m_mu;
            }
        }

        let rows = points
            .iter()
            .zip(brackets)
            .map(|(p, (n, w))| {
                let bits = p.theta.to_bits();
                let a = &table[&(bits, n)];
                if w == 0.0 {
                    a.clone()
                } else {
                    a * (1.0 - w) + &table[&(bits, n + 1)] * w
                }
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[DVector<f64>] {
        &self.rows
    }

    pub fn apply(&self, load: &DVector<f64>) -> Vec<f64> {
        self.rows.iter().map(|g| g.dot(load)).collect()
    }
}

/// Flux predictions as masked sums over load-quadrature points.
///
/// `predict(shape)` equals stepping the FEM system with the load of `shape`
/// and reading the probes, up to rounding.
#[derive(Debug, Clone)]
pub struct LinearFluxMap {
    /// Quadrature point positions.
    xy: Vec<[f64; 2]>,
    /// Row-major `n_points × n_obs` contributions of each point (unit strength).
    contrib: Vec<f64>,
    n_obs: usize,
    strength: f64,
}

impl LinearFluxMap {
    pub fn new(rows: &ResponseRows, quad: &LoadQuadrature, strength: f64) -> Self {
        let n_obs = rows.rows().len();
        let mut xy = Vec::with_capacity(quad.points().len());
        let mut contrib = Vec::with_capacity(quad.points().len() * n_obs);
        for p in quad.points() {
            if p.weights.is_empty() {
                continue;
            }
            xy.push(p.xy);
            for g in rows.rows() {
                contrib.push(p.weights.iter().map(|&(i, w)| w * g[i]).sum());
            }
        }
        Self {
            xy,
            contrib,
            n_obs,
            strength,
        }
    }

    pub fn build(
        mesh: &PolarMesh,
        op: &StepOperator,
        quad: &LoadQuadrature,
        points: &[ObservationPoint],
        strength: f64,
    ) -> Result<Self, FemError> {
        let rows = ResponseRows::build(mesh, op, points)?;
        Ok(Self::new(&rows, quad, strength))
    }

    pub fn observation_count(&self) -> usize {
        self.n_obs
    }

    pub fn predict(&self, shape: &ShapeParams) -> Vec<f64> {
        let mut out = vec![0.0; self.n_obs];
        let [cx, cy] = shape.center();
        let reach = shape.enclosing_radius() * (1.0 + 1e-12);
        let reach2 = reach * reach;
        for (k, &p) in self.xy.iter().enumerate() {
            let (dx, dy) = (p[0] - cx, p[1] - cy);
            if dx * dx + dy * dy <= reach2 && shape.contains(p) {
                let c = &self.contrib[k * self.n_obs..(k + 1) * self.n_obs];
                for (o, v) in out.iter_mut().zip(c) {
                    *o += v;
                }
            }
        }
        for o in &mut out {
            *o *= self.strength;
        }
        out
    }
}
