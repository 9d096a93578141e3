use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::proposal::{
    accept_prob, pcn_step, standard_normal, tune_beta, tuning_gain, update_empirical_cov, AdaptiveProposal,
};
use super::{misfit, ForwardMap, LikelihoodSpec, SamplerError};
use crate::shape::PriorSpec;

/// Step-size adaptation during the head of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub target: f64,
    pub eta: f64,
    /// The gain of window `w` is `eta / w^decay`.
    pub decay: f64,
    /// Iterations per tuning window.
    pub window: usize,
    /// Fraction of the last proposal phase during which β is adapted.
    pub fraction: f64,
    pub min_beta: f64,
    pub max_beta: f64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            target: 0.30,
            eta: 0.5,
            decay: 0.0,
            window: 100,
            fraction: 0.2,
            min_beta: 1e-4,
            max_beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub beta1: f64,
    pub beta2: f64,
    /// Plain pCN iterations before the first covariance build.
    pub n1: usize,
    /// Total iterations.
    pub n: usize,
    /// Covariance refresh period; refresh when `k mod (k0 + 1) == 0`.
    pub k0: usize,
    pub jitter: f64,
    pub tune: Option<TuneConfig>,
    /// Use this covariance for every adaptive proposal and never update it.
    pub fixed_cov: Option<DMatrix<f64>>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            beta1: 0.1,
            beta2: 0.5,
            n1: 0,
            n: 10_000,
            k0: 2_500,
            jitter: super::DEFAULT_JITTER,
            tune: Some(TuneConfig::default()),
            fixed_cov: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let err = |m: String| Err(SamplerError::Config(m));
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b <= 1.0) {
                return err(format!("{name} must lie in (0, 1], got {b}"));
            }
        }
        if self.n == 0 {
            return err("N must be positive".into());
        }
        if self.n1 >= self.n {
            return err(format!("N1 = {} must be smaller than N = {}", self.n1, self.n));
        }
        if self.k0 == 0 {
            return err("k0 must be positive".into());
        }
        if !(self.jitter >= 0.0) {
            return err(format!("jitter must be non-negative, got {}", self.jitter));
        }
        if let Some(t) = &self.tune {
            if t.window < 100 {
                return err(format!(
                    "tuning window must be at least 100 iterations, got {}",
                    t.window
                ));
            }
            if !(t.fraction >= 0.0 && t.fraction <= 1.0) {
                return err(format!("tuning fraction must lie in [0, 1], got {}", t.fraction));
            }
            if !(t.min_beta > 0.0 && t.min_beta <= t.max_beta && t.max_beta <= 1.0) {
                return err("tuning bounds must satisfy 0 < min <= max <= 1".into());
            }
        }
        Ok(())
    }
}

/// Current state of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub z: DVector<f64>,
    pub misfit: f64,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// `z_k`, `k = 1..=N`.
    pub samples: Vec<DVector<f64>>,
    pub phi: Vec<f64>,
    pub accepted: Vec<bool>,
    /// Predictions of the `t̄` map for each stored state (empty without one).
    pub tbar: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    /// Acceptance over the last 20% of the chain.
    pub terminal_acceptance: f64,
    /// Leading samples excluded from posterior statistics.
    pub burn_in: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub cov: Option<DMatrix<f64>>,
    /// Clamped eigenvalues summed over all covariance builds.
    pub clamped: usize,
    /// Iteration of the first adaptive proposal, if any.
    pub adaptive_from: Option<usize>,
}

/// Posterior statistics of one chain; every number is recomputable from the chain CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub iterations: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub terminal_acceptance: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub clamped_eigenvalues: usize,
    pub mean_z: Vec<f64>,
    pub std_z: Vec<f64>,
    pub mean_xi: Vec<f64>,
    pub std_xi: Vec<f64>,
    pub final_cov: Option<Vec<Vec<f64>>>,
}

fn mean_std(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let p = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.iter().map(|s| (s / (n - 1.0).max(1.0)).sqrt()).collect();
    (mean, std)
}

impl ChainOutput {
    /// Samples after the burn-in.
    pub fn retained(&self) -> &[DVector<f64>] {
        &self.samples[self.burn_in..]
    }

    pub fn summary(&self, physical: &dyn Fn(&[f64]) -> Vec<f64>) -> ChainSummary {
        let z: Vec<Vec<f64>> = self.retained().iter().map(|s| s.as_slice().to_vec()).collect();
        let xi: Vec<Vec<f64>> = z.iter().map(|s| physical(s)).collect();
        let (mean_z, std_z) = mean_std(&z);
        let (mean_xi, std_xi) = mean_std(&xi);
        ChainSummary {
            iterations: self.samples.len(),
            burn_in: self.burn_in,
            acceptance_rate: self.acceptance_rate,
            terminal_acceptance: self.terminal_acceptance,
            beta1: self.beta1,
            beta2: self.beta2,
            clamped_eigenvalues: self.clamped,
            mean_z,
            std_z,
            mean_xi,
            std_xi,
            final_cov: self
                .cov
                .as_ref()
                .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect()),
        }
    }
}

struct Tuner {
    cfg: TuneConfig,
    /// Last iteration (inclusive) at which tuning is active; `from - 1` when none.
    until: usize,
    window: usize,
    seen: usize,
    hits: usize,
}

impl Tuner {
    /// Tunes over all of `from..=to` unless it reaches `last`, in which case
    /// only the first `fraction` of it.
    fn new(cfg: TuneConfig, from: usize, to: usize, last: usize) -> Self {
        let len = to + 1 - from;
        let span = if to < last {
            len
        } else {
            (len as f64 * cfg.fraction).floor() as usize
        };
        Self {
            cfg,
            until: from + span - 1,
            window: 0,
            seen: 0,
            hits: 0,
        }
    }

    fn record(&mut self, k: usize, accepted: bool, beta: &mut f64) {
        if k > self.until {
            return;
        }
        self.seen += 1;
        self.hits += usize::from(accepted);
        if self.seen == self.cfg.window {
            self.window += 1;
            let rate = self.hits as f64 / self.seen as f64;
            let c = &self.cfg;
            *beta = tune_beta(
                *beta,
                rate,
                tuning_gain(c.eta, self.window, c.decay),
                c.target,
                c.min_beta,
                c.max_beta,
            );
            self.seen = 0;
            self.hits = 0;
        }
    }
}

/// Adaptive pCN chain.
///
/// Iterations `1..=N1` use plain pCN with `β₁`; the covariance of those
/// samples is then built and iterations `N1+1..=N` use the adaptive proposal
/// with `β₂`, refreshing `C` from all samples so far whenever
/// `k mod (k0 + 1) == 0`. Until a covariance exists plain pCN is used.
/// β is tuned throughout every stretch with a fixed proposal (the plain
/// phase and each interval between covariance refreshes) except the last,
/// where it is tuned over the first `fraction` and then frozen; posterior
/// statistics skip everything up to the last tuned iteration.
pub fn run_chain<R: Rng + ?Sized>(
    config: &SamplerConfig,
    lik: &LikelihoodSpec,
    prior: &PriorSpec,
    z0: &DVector<f64>,
    tbar: Option<&dyn ForwardMap>,
    rng: &mut R,
) -> Result<ChainOutput, SamplerError> {
    config.validate()?;
    let p = prior.dim();
    if z0.len() != p {
        return Err(SamplerError::Config(format!(
            "initial state has {} entries, prior {p}",
            z0.len()
        )));
    }
    let n = config.n;
    let mut z = z0.clone();
    let mut phi = misfit(&z, lik)?;
    if !phi.is_finite() {
        return Err(SamplerError::InvalidStart);
    }
    let predict_tbar = |z: &DVector<f64>| -> Result<Vec<f64>, SamplerError> {
        match tbar {
            Some(f) => Ok(f.predict(z.as_slice())?.unwrap_or_default()),
            None => Ok(Vec::new()),
        }
    };
    let mut cur_tbar = predict_tbar(&z)?;

    let mut beta1 = config.beta1;
    let mut beta2 = config.beta2;
    let mut samples: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut phis = Vec::with_capacity(n);
    let mut accepted = Vec::with_capacity(n);
    let mut tbars = Vec::with_capacity(if tbar.is_some() { n } else { 0 });

    let mut cov: Option<DMatrix<f64>> = config.fixed_cov.clone();
    let mut proposal: Option<AdaptiveProposal> = None;
    let mut clamped = 0;
    let mut adaptive_from = None;
    let plain_end = if config.fixed_cov.is_some() || config.n1 >= 2 {
        config.n1
    } else {
        config.k0
    };
    let mut tuner1 = config
        .tune
        .filter(|_| plain_end >= 1)
        .map(|t| Tuner::new(t, 1, plain_end.min(n), n));
    let mut tuner2: Option<Tuner> = None;
    // last iteration before the next covariance refresh
    let segment_end = |k: usize| -> usize {
        if config.fixed_cov.is_some() {
            n
        } else {
            ((k / (config.k0 + 1) + 1) * (config.k0 + 1) - 1).min(n)
        }
    };
    let mut burn_in = config.n1;

    for k in 1..=n {
        if config.fixed_cov.is_none() {
            let build = if k == config.n1 + 1 {
                config.n1 >= 2
            } else {
                k > config.n1 && k % (config.k0 + 1) == 0 && samples.len() >= 2
            };
            if build {
                cov = Some(update_empirical_cov(&samples, config.jitter)?.c);
                proposal = None;
                tuner2 = config.tune.map(|t| Tuner::new(t, k, segment_end(k), n));
            }
        }
        let adaptive = k > config.n1 && cov.is_some();
        if adaptive {
            if adaptive_from.is_none() {
                adaptive_from = Some(k);
                if config.fixed_cov.is_some() {
                    tuner2 = config.tune.map(|t| Tuner::new(t, k, n, n));
                }
                tuner1 = None;
            }
            let stale = proposal.as_ref().is_none_or(|a| a.beta() != beta2);
            if stale {
                let a = AdaptiveProposal::new(beta2, prior, cov.as_ref().unwrap())?;
                // count each covariance build once
                if proposal.is_none() || config.fixed_cov.is_some() {
                    clamped += a.clamped();
                }
                proposal = Some(a);
            }
        }
        let xi = standard_normal(p, rng);
        let z_star = match (&proposal, adaptive) {
            (Some(a), true) => a.step(&z, &xi),
            _ => pcn_step(&z, beta1, prior, &xi),
        };
        let phi_star = misfit(&z_star, lik)?;
        let u: f64 = rng.random();
        let take = u < accept_prob(phi, phi_star);
        if take {
            z = z_star;
            phi = phi_star;
            if tbar.is_some() {
                cur_tbar = predict_tbar(&z)?;
            }
        }
        if adaptive {
            if let Some(t) = tuner2.as_mut() {
                t.record(k, take, &mut beta2);
                burn_in = burn_in.max(t.until.min(n));
            }
        } else if let Some(t) = tuner1.as_mut() {
            t.record(k, take, &mut beta1);
            burn_in = burn_in.max(t.until.min(k));
        }
        samples.push(z.clone());
        phis.push(phi);
        accepted.push(take);
        if tbar.is_some() {
            tbars.push(cur_tbar.clone());
        }
    }

    let total = accepted.iter().filter(|&&a| a).count();
    let tail = (n / 5).max(1);
    let tail_hits = accepted[n - tail..].iter().filter(|&&a| a).count();
    Ok(ChainOutput {
        samples,
        phi: phis,
        accepted,
        tbar: tbars,
        acceptance_rate: total as f64 / n as f64,
        terminal_acceptance: tail_hits as f64 / tail as f64,
        burn_in: burn_in.min(n - 1),
        beta1,
        beta2,
        cov,
        clamped,
        adaptive_from,
    })
}

/// Writes `iter,accepted,phi,z_1..z_p,xi_1..xi_p` rows.
pub fn write_chain_csv<W: Write>(
    out: &mut W,
    chain: &ChainOutput,
    physical: &dyn Fn(&[f64]) -> Vec<f64>,
) -> std::io::Result<()> {
    let p = chain.samples.first().map_or(0, |s| s.len());
    let mut header = String::from("iter,accepted,phi");
    for i in 1..=p {
        header.push_str(&format!(",z_{i}"));
    }
    for i in 1..=p {
        header.push_str(&format!(",xi_{i}"));
    }
    writeln!(out, "{header}")?;
    for (k, z) in chain.samples.iter().enumerate() {
        write!(out, "{},{},{}", k + 1, u8::from(chain.accepted[k]), chain.phi[k])?;
        for v in z.iter() {
            write!(out, ",{v}")?;
        }
        for v in physical(z.as_slice()) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
