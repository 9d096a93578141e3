//! Adaptive preconditioned Crank–Nicolson sampling of the source posterior.

mod chain;
mod proposal;

use nalgebra::DVector;
use thiserror::Error;

use crate::fem::LinearFluxMap;
use crate::shape::{shape_from_unconstrained, ShapeKind};

pub use chain::{run_chain, write_chain_csv, ChainOutput, ChainState, ChainSummary, SamplerConfig, TuneConfig};
pub use proposal::{
    accept_prob, pcn_propose, pcn_step, tune_beta, tuning_gain, update_empirical_cov, AdaptiveProposal, EmpiricalCov,
    DEFAULT_JITTER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("initial state has infinite misfit")]
    InvalidStart,
    #[error("covariance is not positive definite after jitter")]
    NotPositiveDefinite,
    #[error("forward map failed: {0}")]
    Forward(String),
}

/// Forward map `z ↦ g(ξ(z))` into observation space.
pub trait ForwardMap {
    fn observation_count(&self) -> usize;

    /// `Ok(None)` marks an inadmissible parameter (certain rejection).
    fn predict(&self, z: &[f64]) -> Result<Option<Vec<f64>>, SamplerError>;
}

impl<F: ForwardMap + ?Sized> ForwardMap for &F {
    fn observation_count(&self) -> usize {
        (**self).observation_count()
    }

    fn predict(&self, z: &[f64]) -> Result<Option<Vec<f64>>, SamplerError> {
        (**self).predict(z)
    }
}

/// `g(z) = z`, for tests and calibration.
#[derive(Debug, Clone, Copy)]
pub struct IdentityForward {
    pub dim: usize,
}

impl ForwardMap for IdentityForward {
    fn observation_count(&self) -> usize {
        self.dim
    }

    fn predict(&self, z: &[f64]) -> Result<Option<Vec<f64>>, SamplerError> {
        Ok(Some(z.to_vec()))
    }
}

/// Shape family composed with a precomputed FEM flux map.
#[derive(Debug, Clone)]
pub struct ShapeForward {
    pub map: LinearFluxMap,
    pub kind: ShapeKind,
    pub order: usize,
}

impl ForwardMap for ShapeForward {
    fn observation_count(&self) -> usize {
        self.map.observation_count()
    }

    fn predict(&self, z: &[f64]) -> Result<Option<Vec<f64>>, SamplerError> {
        Ok(shape_from_unconstrained(z, self.kind, self.order).map(|s| self.map.predict(&s)))
    }
}

/// Gaussian likelihood `exp(-‖d - g‖² / 2σ²)`.
pub struct LikelihoodSpec<'a> {
    pub sigma: f64,
    pub data: Vec<f64>,
    pub forward: &'a dyn ForwardMap,
}

impl<'a> LikelihoodSpec<'a> {
    pub fn new(sigma: f64, data: Vec<f64>, forward: &'a dyn ForwardMap) -> Result<Self, SamplerError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(SamplerError::Config(format!("sigma must be positive, got {sigma}")));
        }
        if data.is_empty() {
            return Err(SamplerError::Config("no data".into()));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(SamplerError::Forward(format!("non-finite data value {v}")));
        }
        if data.len() != forward.observation_count() {
            return Err(SamplerError::Config(format!(
                "{} data values for {} observations",
                data.len(),
                forward.observation_count()
            )));
        }
        Ok(Self { sigma, data, forward })
    }
}

/// `Φ = ‖d - g(ξ(z))‖² / 2σ²`, `+∞` for inadmissible `z`.
pub fn misfit(z: &DVector<f64>, lik: &LikelihoodSpec) -> Result<f64, SamplerError> {
    let Some(pred) = lik.forward.predict(z.as_slice())? else {
        return Ok(f64::INFINITY);
    };
    if pred.len() != lik.data.len() {
        return Err(SamplerError::Forward(format!(
            "forward map returned {} values, expected {}",
            pred.len(),
            lik.data.len()
        )));
    }
    if let Some(g) = pred.iter().find(|g| !g.is_finite()) {
        return Err(SamplerError::Forward(format!("non-finite prediction {g}")));
    }
    let ss: f64 = lik.data.iter().zip(&pred).map(|(d, g)| (d - g) * (d - g)).sum();
    let phi = ss / (2.0 * lik.sigma * lik.sigma);
    if !phi.is_finite() {
        return Err(SamplerError::Forward(format!(
            "misfit overflows ({ss:e} squared residual)"
        )));
    }
    Ok(phi)
}
