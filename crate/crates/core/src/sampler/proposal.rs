use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use super::SamplerError;
use crate::shape::PriorSpec;

/// Diagonal jitter added to every empirical covariance.
pub const DEFAULT_JITTER: f64 = 1e-8;

pub(crate) fn standard_normal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// `√(1-β²) z + β B^{1/2} ξ` for a given standard normal `ξ`.
pub fn pcn_step(z: &DVector<f64>, beta: f64, prior: &PriorSpec, xi: &DVector<f64>) -> DVector<f64> {
    let a = (1.0 - beta * beta).max(0.0).sqrt();
    DVector::from_iterator(
        z.len(),
        prior
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, b)| a * z[i] + beta * b.sqrt() * xi[i]),
    )
}

/// Plain pCN proposal with `w ~ N(0, B)`.
pub fn pcn_propose<R: Rng + ?Sized>(z: &DVector<f64>, beta: f64, prior: &PriorSpec, rng: &mut R) -> DVector<f64> {
    let xi = standard_normal(z.len(), rng);
    pcn_step(z, beta, prior, &xi)
}

/// `min(1, exp(Φ - Φ*))`.
pub fn accept_prob(phi: f64, phi_star: f64) -> f64 {
    if phi_star == f64::INFINITY {
        return 0.0;
    }
    if phi_star <= phi {
        return 1.0;
    }
    (phi - phi_star).exp()
}

/// Empirical covariance with diagonal jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCov {
    pub c: DMatrix<f64>,
    pub count: usize,
}

/// Unbiased sample covariance of `samples` plus `jitter · I`.
pub fn update_empirical_cov(samples: &[DVector<f64>], jitter: f64) -> Result<EmpiricalCov, SamplerError> {
    let n = samples.len();
    if n < 2 {
        return Err(SamplerError::Config(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let p = samples[0].len();
    let mut mean = DVector::zeros(p);
    for s in samples {
        mean += s;
    }
    mean /= n as f64;
    let mut c = DMatrix::zeros(p, p);
    for s in samples {
        let d = s - &mean;
        c.ger(1.0, &d, &d, 1.0);
    }
    c /= (n - 1) as f64;
    // exact symmetry
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
        c[(i, i)] += jitter;
    }
    Ok(EmpiricalCov { c, count: n })
}

/// Adaptive pCN proposal `S z + β w`, `w ~ N(0, C)`, with
/// `S = (I - β² C B⁻¹)^{1/2}` evaluated as `B^{1/2} (I - Ã)^{1/2} B^{-1/2}`,
/// `Ã = β² B^{-1/2} C B^{-1/2}`, negative eigenvalues of `I - Ã` set to 0.
#[derive(Debug, Clone)]
pub struct AdaptiveProposal {
    beta: f64,
    s: DMatrix<f64>,
    chol: DMatrix<f64>,
    clamped: usize,
}

impl AdaptiveProposal {
    pub fn new(beta: f64, prior: &PriorSpec, cov: &DMatrix<f64>) -> Result<Self, SamplerError> {
        let p = prior.dim();
        if cov.nrows() != p || cov.ncols() != p {
            return Err(SamplerError::Config(format!(
                "covariance is {}x{}, prior has dimension {p}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let sb: Vec<f64> = prior.diagonal().iter().map(|b| b.sqrt()).collect();
        let mut a = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                a[(i, j)] = beta * beta * cov[(i, j)] / (sb[i] * sb[j]);
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        let eig = a.symmetric_eigen();
        let mut clamped = 0;
        let roots = eig.eigenvalues.map(|mu| {
            let v = 1.0 - mu;
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v.sqrt()
            }
        });
        let q = &eig.eigenvectors;
        let s_tilde = q * DMatrix::from_diagonal(&roots) * q.transpose();
        let mut s = s_tilde;
        for i in 0..p {
            for j in 0..p {
                s[(i, j)] *= sb[i] / sb[j];
            }
        }
        let chol = cov.clone().cholesky().ok_or(SamplerError::NotPositiveDefinite)?.l();
        Ok(Self { beta, s, chol, clamped })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `S`.
    pub fn contraction(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Number of eigenvalues of `β² C B⁻¹` above 1 that were clamped.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// Proposal for a given standard normal `ξ`.
    pub fn step(&self, z: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        &self.s * z + (&self.chol * xi) * self.beta
    }

    pub fn propose<R: Rng + ?Sized>(&self, z: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let xi = standard_normal(z.len(), rng);
        self.step(z, &xi)
    }
}

/// `β · exp(η_w (α̂ - target))` clipped to `[min, max]`.
pub fn tune_beta(beta: f64, acceptance: f64, eta_w: f64, target: f64, min: f64, max: f64) -> f64 {
    (beta * (eta_w * (acceptance - target)).exp()).clamp(min, max)
}

/// Gain `η / w^decay` of the `w`-th tuning window (1-based).
pub fn tuning_gain(eta: f64, window: usize, decay: f64) -> f64 {
    eta / (window.max(1) as f64).powf(decay)
}
