use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig};
use crate::fem::{
    assemble, write_flux_csv, FemError, FieldHistory, LinearFluxMap, LoadQuadrature, PolarMesh, StepOperator,
};
use crate::sampler::{
    misfit, run_chain, write_chain_csv, ChainOutput, ChainSummary, LikelihoodSpec, SamplerError, ShapeForward,
};
use crate::shape::{
    parameter_distance, prior_covariance, shape_from_unconstrained, to_physical, PriorSpec, ShapeParams,
};
use crate::spectral::SpectralError;
use crate::strategy::{
    run_fixed_sensor, run_strategy, write_movement_csv, MeasurementSet, StrategyError, StrategyOutcome, WindowFlag,
};

/// Stream labels for the two generators derived from one seed.
pub const TRUTH_STREAM: u64 = u64::from_le_bytes(*b"truth\0\0\0");
pub const SAMPLER_STREAM: u64 = u64::from_le_bytes(*b"sampler\0");

/// Vertices of the reconstruction polylines.
const POLYLINE_POINTS: usize = 256;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("invalid run: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl ExperimentError {
    /// Process exit code: 2 for invalid configs or inputs, 3 for numerical
    /// failures, 1 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Invalid(_) | ExperimentError::Input(_) => 2,
            ExperimentError::Numerical(_) => 3,
            ExperimentError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<FemError> for ExperimentError {
    fn from(e: FemError) -> Self {
        ExperimentError::Numerical(e.to_string())
    }
}

impl From<SpectralError> for ExperimentError {
    fn from(e: SpectralError) -> Self {
        ExperimentError::Numerical(e.to_string())
    }
}

impl From<StrategyError> for ExperimentError {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::Config(m) => ExperimentError::Invalid(m),
            other => ExperimentError::Numerical(other.to_string()),
        }
    }
}

fn sampler_to_strategy(e: SamplerError) -> StrategyError {
    match e {
        SamplerError::Config(m) => StrategyError::Config(m),
        other => StrategyError::Inference(other.to_string()),
    }
}

/// Generator for one named stream of a master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Posterior of one sensing window.
#[derive(Debug, Clone)]
pub struct WindowPosterior {
    pub chain: ChainOutput,
    pub summary: ChainSummary,
    pub observations: usize,
}

/// Coarse-grid inversion state carried across windows.
pub struct Inversion {
    cfg: ExperimentConfig,
    mesh: PolarMesh,
    op: StepOperator,
    quad: LoadQuadrature,
    prior: PriorSpec,
    rng: ChaCha20Rng,
    /// Posterior mean `z`, last state and tuned β's of the previous window.
    prev: Option<(DVector<f64>, DVector<f64>, f64, f64)>,
}

impl Inversion {
    pub fn new(cfg: &ExperimentConfig, rng: ChaCha20Rng) -> Result<Self, ExperimentError> {
        let mesh = PolarMesh::new(cfg.coarse.n_r, cfg.coarse.n_theta)?;
        let mats = assemble(&mesh);
        let op = StepOperator::new(&mats, cfg.dt)?;
        let quad = LoadQuadrature::new(&mesh, cfg.load_points);
        Ok(Self {
            prior: prior_covariance(cfg.kind, cfg.fourier_order),
            cfg: cfg.clone(),
            mesh,
            op,
            quad,
            rng,
            prev: None,
        })
    }

    pub fn physical(&self) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
        move |z: &[f64]| to_physical(z, self.cfg.kind, self.cfg.fourier_order).expect("dimension checked")
    }

    /// Runs one chain on all records of `data`.
    pub fn infer(&mut self, data: &MeasurementSet, last: bool) -> Result<WindowPosterior, StrategyError> {
        let points = data.observation_points();
        let map = LinearFluxMap::build(&self.mesh, &self.op, &self.quad, &points, self.cfg.strength)?;
        let forward = ShapeForward {
            map,
            kind: self.cfg.kind,
            order: self.cfg.fourier_order,
        };
        let lik = LikelihoodSpec::new(self.cfg.sigma, data.data(), &forward).map_err(sampler_to_strategy)?;

        let mut sc = self.cfg.sampler.clone();
        if !last {
            if let Some(n) = self.cfg.n_intermediate {
                sc.n = n;
            }
        }
        let start = DVector::from_vec(self.cfg.start_z());
        let mut z0 = start.clone();
        if let Some((mean, state, b1, b2)) = &self.prev {
            if self.cfg.carry_beta {
                sc.beta1 = *b1;
                sc.beta2 = *b2;
            }
            if self.cfg.warm_start {
                // fall back when the mean is inadmissible under the new data
                for cand in [mean, state] {
                    if misfit(cand, &lik).map_err(sampler_to_strategy)?.is_finite() {
                        z0 = cand.clone();
                        break;
                    }
                }
            }
        }
        if !misfit(&z0, &lik).map_err(sampler_to_strategy)?.is_finite() {
            return Err(StrategyError::Config("the start shape has infinite misfit".into()));
        }
        let chain = run_chain(&sc, &lik, &self.prior, &z0, None, &mut self.rng).map_err(sampler_to_strategy)?;
        let summary = chain.summary(&self.physical());
        let mean = DVector::from_vec(summary.mean_z.clone());
        let state = chain.samples.last().cloned().unwrap_or(start);
        self.prev = Some((mean, state, chain.beta1, chain.beta2));
        Ok(WindowPosterior {
            chain,
            summary,
            observations: points.len(),
        })
    }
}

pub fn truth_history(cfg: &ExperimentConfig) -> Result<FieldHistory, ExperimentError> {
    let mesh = PolarMesh::new(cfg.fine.n_r, cfg.fine.n_theta)?;
    Ok(FieldHistory::for_shape(
        mesh,
        cfg.dt,
        &cfg.truth_shape(),
        cfg.strength,
        cfg.load_points,
    )?)
}

fn truth_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.truth_seed.unwrap_or(cfg.seed)
}

fn sampler_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.sampler_seed.unwrap_or(cfg.seed)
}

/// In-memory result of one experiment.
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub truth: ShapeParams,
    pub strategy: StrategyOutcome<WindowPosterior>,
}

impl ExperimentOutcome {
    /// Euclidean distance of a window's posterior mean from the truth, angles wrapped.
    pub fn mean_error(&self, window: usize) -> f64 {
        let s = &self.strategy.posteriors[window].summary;
        parameter_distance(&s.mean_xi, self.truth.xi(), self.config.kind)
    }

    pub fn final_error(&self) -> f64 {
        self.mean_error(self.strategy.posteriors.len() - 1)
    }
}

/// Truth solve on the fine grid, then the strategy loop with coarse-grid inversion.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let mut truth = truth_history(cfg)?;
    let mut noise = stream_rng(truth_seed(cfg), TRUTH_STREAM);
    let mut inv = Inversion::new(cfg, stream_rng(sampler_seed(cfg), SAMPLER_STREAM))?;
    let params = cfg.strategy_params();
    let strategy = run_strategy(
        &params,
        &mut truth,
        cfg.sensor_start,
        cfg.sigma,
        &mut noise,
        |d, _, last| inv.infer(d, last),
    )?;
    Ok(ExperimentOutcome {
        truth: cfg.truth_shape(),
        config: cfg.clone(),
        strategy,
    })
}

/// Sensor frozen at `sensor_start` over `spans`, one inference at the end.
pub fn simulate_fixed(
    cfg: &ExperimentConfig,
    spans: &[(f64, f64)],
) -> Result<(MeasurementSet, WindowPosterior), ExperimentError> {
    let mut truth = truth_history(cfg)?;
    let mut noise = stream_rng(truth_seed(cfg), TRUTH_STREAM);
    let mut inv = Inversion::new(cfg, stream_rng(sampler_seed(cfg), SAMPLER_STREAM))?;
    Ok(run_fixed_sensor(
        cfg.n_t,
        &mut truth,
        cfg.sensor_start,
        spans,
        cfg.sigma,
        &mut noise,
        |d, _, last| inv.infer(d, last),
    )?)
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub data_csv: PathBuf,
    pub triples_csv: PathBuf,
    pub movement_csv: PathBuf,
    pub truth_polyline: PathBuf,
    pub chain_csvs: Vec<PathBuf>,
    pub reconstructions: Vec<PathBuf>,
    pub summary_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn all(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![
            &self.config,
            &self.data_csv,
            &self.triples_csv,
            &self.movement_csv,
            &self.truth_polyline,
            &self.summary_json,
        ];
        v.extend(self.chain_csvs.iter().map(PathBuf::as_path));
        v.extend(self.reconstructions.iter().map(PathBuf::as_path));
        v.extend(self.plots.iter().map(PathBuf::as_path));
        v
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowReport {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub theta: f64,
    pub dir: Option<String>,
    pub d: f64,
    pub b: f64,
    pub flag: String,
    pub observations: usize,
    pub chain_csv: String,
    pub reconstruction_csv: String,
    pub error: f64,
    pub chain: ChainSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub shape: String,
    pub xi_true: Vec<f64>,
    pub seed: u64,
    pub truth_seed: u64,
    pub sampler_seed: u64,
    pub stop: String,
    pub sensor_path: Vec<f64>,
    pub final_theta: f64,
    pub final_mean_xi: Vec<f64>,
    pub final_std_xi: Vec<f64>,
    pub final_error: f64,
    pub warnings: Vec<String>,
    pub windows: Vec<WindowReport>,
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ExperimentError::io(path, e))
}

fn finish(path: &Path, w: BufWriter<File>) -> Result<(), ExperimentError> {
    w.into_inner()
        .map_err(|e| ExperimentError::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| ExperimentError::io(path, e))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), ExperimentError> {
    let mut w = create(path)?;
    body(&mut w).map_err(|e| ExperimentError::io(path, e))?;
    finish(path, w)
}

fn write_polyline(path: &Path, shape: Option<&ShapeParams>) -> Result<(), ExperimentError> {
    write_file(path, |w| {
        writeln!(w, "x,y")?;
        if let Some(s) = shape {
            let mut pts = s.polygon(POLYLINE_POINTS);
            pts.push(pts[0]);
            for [x, y] in pts {
                writeln!(w, "{x},{y}")?;
            }
        }
        Ok(())
    })
}

/// Shape of a window's posterior mean, in physical or sampler coordinates.
pub fn mean_shape(cfg: &ExperimentConfig, s: &ChainSummary) -> Option<ShapeParams> {
    ShapeParams::new(cfg.kind, s.mean_xi.clone(), cfg.fourier_order)
        .ok()
        .or_else(|| shape_from_unconstrained(&s.mean_z, cfg.kind, cfg.fourier_order))
}

/// Writes every artifact of `outcome` into `dir`.
pub fn write_artifacts(
    outcome: &ExperimentOutcome,
    warnings: &[String],
    dir: &Path,
) -> Result<RunArtifacts, ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let cfg = &outcome.config;
    let st = &outcome.strategy;
    let mut art = RunArtifacts {
        dir: dir.to_path_buf(),
        config: dir.join("config.cfg"),
        data_csv: dir.join("data.csv"),
        triples_csv: dir.join("triples.csv"),
        movement_csv: dir.join("movement.csv"),
        truth_polyline: dir.join("truth.csv"),
        summary_json: dir.join("summary.json"),
        ..RunArtifacts::default()
    };
    let text = cfg.to_text();
    write_file(&art.config, |w| w.write_all(text.as_bytes()))?;
    write_file(&art.data_csv, |w| write_flux_csv(w, &st.data.flux_samples()))?;
    write_file(&art.triples_csv, |w| {
        writeln!(w, "k,t,theta,delta_theta,flux_minus,flux_center,flux_plus")?;
        for t in &st.data.triples {
            let [a, b, c] = t.values;
            writeln!(w, "{},{},{},{},{a},{b},{c}", t.window, t.t, t.theta, t.delta_theta)?;
        }
        Ok(())
    })?;
    write_file(&art.movement_csv, |w| write_movement_csv(w, &st.windows))?;
    write_polyline(&art.truth_polyline, Some(&outcome.truth))?;

    let physical = |z: &[f64]| to_physical(z, cfg.kind, cfg.fourier_order).expect("dimension checked");
    let mut reports = Vec::new();
    for (k, (log, post)) in st.windows.iter().zip(&st.posteriors).enumerate() {
        let chain_name = format!("chain_w{k}.csv");
        let recon_name = format!("reconstruction_w{k}.csv");
        let chain_path = dir.join(&chain_name);
        let recon_path = dir.join(&recon_name);
        write_file(&chain_path, |w| write_chain_csv(w, &post.chain, &physical))?;
        write_polyline(&recon_path, mean_shape(cfg, &post.summary).as_ref())?;
        art.chain_csvs.push(chain_path);
        art.reconstructions.push(recon_path);
        reports.push(WindowReport {
            k: log.k,
            t_start: log.t_start,
            t_end: log.t_end,
            theta: log.theta,
            dir: log.dir.map(|d| d.label().to_string()),
            d: log.d,
            b: log.b,
            flag: log.flag.to_string(),
            observations: post.observations,
            chain_csv: chain_name,
            reconstruction_csv: recon_name,
            error: outcome.mean_error(k),
            chain: post.summary.clone(),
        });
    }
    let last = &st.final_posterior().summary;
    let summary = RunSummary {
        shape: cfg.kind.to_string(),
        xi_true: cfg.xi_true.clone(),
        seed: cfg.seed,
        truth_seed: truth_seed(cfg),
        sampler_seed: sampler_seed(cfg),
        stop: st.stop.to_string(),
        sensor_path: st.sensor_path(),
        final_theta: st.final_theta,
        final_mean_xi: last.mean_xi.clone(),
        final_std_xi: last.std_xi.clone(),
        final_error: outcome.final_error(),
        warnings: warnings.to_vec(),
        windows: reports,
    };
    write_file(&art.summary_json, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    if cfg.plots {
        art.plots = super::plot::emit_plots(dir)?;
    }
    Ok(art)
}

/// Runs the configured experiment and writes its artifacts to `dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    warnings: &[String],
    dir: &Path,
) -> Result<RunArtifacts, ExperimentError> {
    let outcome = simulate(cfg)?;
    write_artifacts(&outcome, warnings, dir)
}

/// Whether a stop flag ended the loop through the reversal rule.
pub fn stopped_by_reversal(flag: WindowFlag) -> bool {
    flag == WindowFlag::Stop(crate::strategy::StopFlag::Reversal)
}
