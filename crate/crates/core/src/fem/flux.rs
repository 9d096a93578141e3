use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::DVector;

use super::assembly::LoadQuadrature;
use super::mesh::{lagrange2, PolarMesh};
use super::stepping::{FieldState, StepOperator};
use super::FemError;
use crate::shape::ShapeParams;

/// One boundary observation `∂u/∂n(θ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSample {
    pub theta: f64,
    pub t: f64,
    pub value: f64,
}

/// Linear functional `U ↦ ∂_r u_h(1, θ)` as sparse weights on interior unknowns.
///
/// Differentiates the radial quadratic of the outermost element row at
/// `r = 1` and interpolates quadratically in `θ` inside the element.
pub fn flux_probe(mesh: &PolarMesh, theta: f64) -> Vec<(usize, f64)> {
    let theta = theta.rem_euclid(TAU);
    let width = 2.0 * mesh.angular_spacing();
    let et = ((theta / width).floor() as usize).min(mesh.n_theta() - 1);
    let xt = 2.0 * (theta - width * et as f64) / width - 1.0;
    let nt = lagrange2(xt);
    // radial basis derivatives at the outer node (x = 1), scaled by dx/dr
    let h = mesh.radial_spacing();
    let dr = [0.5 / h, -2.0 / h];
    let i0 = 2 * mesh.n_r() - 2;
    let mut w = Vec::with_capacity(6);
    for (a, d) in dr.iter().enumerate() {
        for (b, n) in nt.iter().enumerate() {
            w.push((mesh.node_index(i0 + a, 2 * et + b), d * n));
        }
    }
    w
}

pub fn apply_probe(probe: &[(usize, f64)], u: &DVector<f64>) -> f64 {
    probe.iter().map(|&(i, w)| w * u[i]).sum()
}

/// `∂u/∂n` at `(r = 1, θ)` for the given field.
pub fn boundary_flux(state: &FieldState, mesh: &PolarMesh, theta: f64) -> f64 {
    apply_probe(&flux_probe(mesh, theta), &state.u)
}

/// Splits `t` into a step index and a linear interpolation weight.
pub(crate) fn time_bracket(t: f64, dt: f64) -> (usize, f64) {
    let s = t / dt;
    let n = s.round();
    if (s - n).abs() < 1e-9 {
        (n.max(0.0) as usize, 0.0)
    } else {
        let f = s.floor();
        (f as usize, s - f)
    }
}

/// Full time history of one forward solve with a time-constant source.
///
/// States are produced lazily on the uniform grid `n Δt`; flux between grid
/// times is linearly interpolated.
pub struct FieldHistory {
    mesh: PolarMesh,
    op: StepOperator,
    load: DVector<f64>,
    states: Vec<DVector<f64>>,
}

impl FieldHistory {
    pub fn new(mesh: PolarMesh, op: StepOperator, load: DVector<f64>) -> Self {
        let zero = DVector::zeros(mesh.dof_count());
        Self {
            mesh,
            op,
            load,
            states: vec![zero],
        }
    }

    /// Assembles and wires a history for `shape` with source strength `b`.
    pub fn for_shape(
        mesh: PolarMesh,
        dt: f64,
        shape: &ShapeParams,
        strength: f64,
        load_points: usize,
    ) -> Result<Self, FemError> {
        let mats = super::assemble(&mesh);
        let op = StepOperator::new(&mats, dt)?;
        let load = LoadQuadrature::new(&mesh, load_points).load(shape, strength);
        Ok(Self::new(mesh, op, load))
    }

    pub fn mesh(&self) -> &PolarMesh {
        &self.mesh
    }

    pub fn dt(&self) -> f64 {
        self.op.dt()
    }

    pub fn load(&self) -> &DVector<f64> {
        &self.load
    }

    pub fn ensure_step(&mut self, n: usize) -> Result<(), FemError> {
        while self.states.len() <= n {
            let k = self.states.len() - 1;
            let prev = FieldState {
                u: self.states[k].clone(),
                t: k as f64 * self.op.dt(),
            };
            let next = self.op.step(&prev, &self.load)?;
            self.states.push(next.u);
        }
        Ok(())
    }

    pub fn state(&mut self, n: usize) -> Result<FieldState, FemError> {
        self.ensure_step(n)?;
        Ok(FieldState {
            u: self.states[n].clone(),
            t: n as f64 * self.op.dt(),
        })
    }

    pub fn flux(&mut self, theta: f64, t: f64) -> Result<f64, FemError> {
        if !(t >= 0.0) {
            return Err(FemError::InvalidArgument(format!("negative time {t}")));
        }
        let (n, w) = time_bracket(t, self.op.dt());
        let probe = flux_probe(&self.mesh, theta);
        self.ensure_step(n + usize::from(w > 0.0))?;
        let a = apply_probe(&probe, &self.states[n]);
        if w == 0.0 {
            Ok(a)
        } else {
            let b = apply_probe(&probe, &self.states[n + 1]);
            Ok((1.0 - w) * a + w * b)
        }
    }
}

/// Writes samples as `t,theta,flux` CSV.
pub fn write_flux_csv<W: Write>(out: &mut W, samples: &[FluxSample]) -> std::io::Result<()> {
    writeln!(out, "t,theta,flux")?;
    for s in samples {
        writeln!(out, "{},{},{}", s.t, s.theta, s.value)?;
    }
    Ok(())
}
