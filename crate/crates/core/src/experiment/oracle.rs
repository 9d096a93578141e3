//! FEM boundary flux against the eigenfunction series.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridSpec};
use super::run::ExperimentError;
use crate::fem::{FieldHistory, PolarMesh};
use crate::shape::ShapeParams;
use crate::spectral::{EigenBasis, SpectralForward};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxComparison {
    pub theta: f64,
    pub t: f64,
    pub fem: f64,
    pub spectral: f64,
}

impl FluxComparison {
    pub fn relative_error(&self) -> f64 {
        (self.fem - self.spectral).abs() / self.spectral.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub grid: (usize, usize),
    pub terms: usize,
    pub rows: Vec<FluxComparison>,
}

impl OracleReport {
    /// Largest pointwise relative error.
    pub fn max_relative(&self) -> f64 {
        self.rows.iter().map(FluxComparison::relative_error).fold(0.0, f64::max)
    }

    /// Largest error relative to the peak series flux at the same time.
    pub fn max_relative_to_peak(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let peak = self
                .rows
                .iter()
                .filter(|q| q.t == r.t)
                .map(|q| q.spectral.abs())
                .fold(0.0, f64::max);
            worst = worst.max((r.fem - r.spectral).abs() / peak);
        }
        worst
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "grid {}x{} elements, {} series terms",
            self.grid.0, self.grid.1, self.terms
        );
        let _ = writeln!(
            s,
            "{:>8} {:>6} {:>14} {:>14} {:>10}",
            "theta", "t", "fem", "series", "rel.err"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>8.4} {:>6.3} {:>14.6e} {:>14.6e} {:>10.3e}",
                r.theta,
                r.t,
                r.fem,
                r.spectral,
                r.relative_error()
            );
        }
        let _ = writeln!(s, "max relative error        {:.4e}", self.max_relative());
        let _ = writeln!(s, "max error relative to peak {:.4e}", self.max_relative_to_peak());
        s
    }
}

/// `n` equispaced angles starting at 0.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Flux of `shape` on a FEM grid and from an `terms`-term series at every
/// `(θ, t)` pair.
#[allow(clippy::too_many_arguments)]
pub fn compare_flux(
    shape: &ShapeParams,
    strength: f64,
    grid: GridSpec,
    dt: f64,
    load_points: usize,
    terms: usize,
    angles: &[f64],
    times: &[f64],
) -> Result<OracleReport, ExperimentError> {
    let mesh = PolarMesh::new(grid.n_r, grid.n_theta)?;
    let mut fem = FieldHistory::for_shape(mesh, dt, shape, strength, load_points)?;
    let series = SpectralForward::new(shape, strength, EigenBasis::build(terms)?);
    let mut rows = Vec::with_capacity(angles.len() * times.len());
    for &t in times {
        for &theta in angles {
            rows.push(FluxComparison {
                theta,
                t,
                fem: fem.flux(theta, t)?,
                spectral: series.flux(theta, t)?,
            });
        }
    }
    Ok(OracleReport {
        grid: (grid.n_r, grid.n_theta),
        terms,
        rows,
    })
}

/// The standard report for a config: 10 angles at `t ∈ {0.05, 0.1, 0.2}`
/// on the fine grid against a 200-term series.
pub fn oracle_compare(cfg: &ExperimentConfig) -> Result<OracleReport, ExperimentError> {
    compare_flux(
        &cfg.truth_shape(),
        cfg.strength,
        cfg.fine,
        cfg.dt,
        cfg.load_points,
        200,
        &uniform_angles(10),
        &[0.05, 0.1, 0.2],
    )
}
