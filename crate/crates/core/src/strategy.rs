//! Closed-loop Measure–Infer–Move sensor strategy on the unit circle.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::fem::{FemError, FieldHistory, FluxSample, ObservationPoint};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("invalid strategy configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("inference failed: {0}")]
    Inference(String),
}

/// Direction of travel along the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Cw,
    Ccw,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Cw => "cw",
            Direction::Ccw => "ccw",
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Direction::Cw => -1.0,
            Direction::Ccw => 1.0,
        }
    }
}

/// Outcome of the end-of-window stop test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopFlag {
    Continue,
    LocalMax,
    Reversal,
}

impl StopFlag {
    pub fn label(self) -> &'static str {
        match self {
            StopFlag::Continue => "continue",
            StopFlag::LocalMax => "local_max",
            StopFlag::Reversal => "reversal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorState {
    pub theta: f64,
    pub prev_dir: Option<Direction>,
    pub k: usize,
}

impl SensorState {
    pub fn new(theta: f64) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
            prev_dir: None,
            k: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelBudget {
    pub d: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub m: u32,
    /// Step unit as a fraction of π.
    pub c1: f64,
    /// Sensor speed (arc length per unit time).
    pub c: f64,
    pub n_t: usize,
    pub delta_theta: f64,
    /// Window length in time steps.
    pub window_steps: usize,
    pub dt: f64,
    /// Hard cap on sensing windows before the loop gives up.
    pub max_windows: usize,
}

impl StrategyParams {
    /// Circle, kite and four-leaf settings with the formula step rule.
    pub fn standard(delta_theta: f64) -> Self {
        Self {
            m: 10,
            c1: 1.0 / 20.0,
            c: 20.0 * PI,
            n_t: 80,
            delta_theta,
            window_steps: 80,
            dt: 1.0 / 400.0,
            max_windows: 24,
        }
    }

    /// Halves `c1` and `c`: the step length halves, the travel time stays.
    pub fn half_step(mut self) -> Self {
        self.c1 *= 0.5;
        self.c *= 0.5;
        self
    }

    pub fn window_length(&self) -> f64 {
        self.window_steps as f64 * self.dt
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let bad = |m: &str| Err(StrategyError::Config(m.to_string()));
        if self.m < 1 {
            return bad("m must be at least 1");
        }
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return bad("c1 must be positive");
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad("c must be positive");
        }
        if self.n_t < 1 {
            return bad("N_t must be at least 1");
        }
        if !(self.delta_theta > 0.0) || self.delta_theta >= PI {
            return bad("delta_theta must lie in (0, π)");
        }
        if self.window_steps < 1 || !(self.dt > 0.0) {
            return bad("window length must be positive");
        }
        if self.max_windows < 1 {
            return bad("max_windows must be at least 1");
        }
        Ok(())
    }
}

/// Boundary flux of the true field.
pub trait TruthFlux {
    fn flux(&mut self, theta: f64, t: f64) -> Result<f64, StrategyError>;
}

impl TruthFlux for FieldHistory {
    fn flux(&mut self, theta: f64, t: f64) -> Result<f64, StrategyError> {
        Ok(FieldHistory::flux(self, theta, t)?)
    }
}

/// Adapts a closure `(θ, t) ↦ flux` as a truth source.
pub struct FnTruth<F>(pub F);

impl<F: FnMut(f64, f64) -> f64> TruthFlux for FnTruth<F> {
    fn flux(&mut self, theta: f64, t: f64) -> Result<f64, StrategyError> {
        Ok((self.0)(theta, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub window: usize,
    pub t: f64,
    pub theta: f64,
    pub value: f64,
}

/// Noisy flux at `θ − Δθ, θ, θ + Δθ` at the end of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndTriple {
    pub window: usize,
    pub t: f64,
    pub theta: f64,
    pub delta_theta: f64,
    pub values: [f64; 3],
}

/// Accumulated measurements. Only `records` enter the likelihood.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementSet {
    pub records: Vec<Record>,
    pub triples: Vec<EndTriple>,
}

impl MeasurementSet {
    pub fn observation_points(&self) -> Vec<ObservationPoint> {
        self.records
            .iter()
            .map(|r| ObservationPoint { theta: r.theta, t: r.t })
            .collect()
    }

    pub fn data(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    /// Window records plus three values per end-of-window triple.
    pub fn value_count(&self) -> usize {
        self.records.len() + 3 * self.triples.len()
    }

    pub fn flux_samples(&self) -> Vec<FluxSample> {
        self.records
            .iter()
            .map(|r| FluxSample {
                theta: r.theta,
                t: r.t,
                value: r.value,
            })
            .collect()
    }
}

fn noisy<R: Rng + ?Sized>(value: f64, sigma: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(StandardNormal);
    value + sigma * e
}

/// `N_t` uniform times in `(start, end]`, ending exactly at `end`.
pub fn window_times(start: f64, end: f64, n_t: usize) -> Result<Vec<f64>, StrategyError> {
    if !(end > start) {
        return Err(StrategyError::Config(format!(
            "sensing window [{start}, {end}] is empty: the sensor cannot arrive in time"
        )));
    }
    if n_t == 0 {
        return Err(StrategyError::Config("N_t must be at least 1".into()));
    }
    let h = (end - start) / n_t as f64;
    let mut t: Vec<f64> = (1..n_t).map(|j| start + h * j as f64).collect();
    t.push(end);
    Ok(t)
}

/// Noisy window samples at the sensor angle over `[start, end]`.
pub fn sample_window<R: Rng + ?Sized>(
    k: usize,
    sensor: &SensorState,
    start: f64,
    end: f64,
    n_t: usize,
    truth: &mut dyn TruthFlux,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<Record>, StrategyError> {
    window_times(start, end, n_t)?
        .into_iter()
        .map(|t| {
            let v = truth.flux(sensor.theta, t)?;
            Ok(Record {
                window: k,
                t,
                theta: sensor.theta,
                value: noisy(v, sigma, rng),
            })
        })
        .collect()
}

pub fn measure_triple<R: Rng + ?Sized>(
    k: usize,
    theta: f64,
    t: f64,
    delta_theta: f64,
    truth: &mut dyn TruthFlux,
    sigma: f64,
    rng: &mut R,
) -> Result<EndTriple, StrategyError> {
    let mut values = [0.0; 3];
    let angles = [
        (theta - delta_theta).rem_euclid(TAU),
        theta,
        (theta + delta_theta).rem_euclid(TAU),
    ];
    for (v, a) in values.iter_mut().zip(angles) {
        *v = noisy(truth.flux(a, t)?, sigma, rng);
    }
    Ok(EndTriple {
        window: k,
        t,
        theta,
        delta_theta,
        values,
    })
}

/// Centered difference `(|d₊| − |d₋|) / 2Δθ` of the absolute flux.
pub fn angular_derivative(values: [f64; 3], delta_theta: f64) -> f64 {
    (values[2].abs() - values[0].abs()) / (2.0 * delta_theta)
}

pub fn decide_direction(phi_theta: f64) -> Direction {
    if phi_theta > 0.0 {
        Direction::Ccw
    } else {
        Direction::Cw
    }
}

pub fn step_size(dir: Direction, prev: Option<Direction>, params: &StrategyParams) -> TravelBudget {
    let units = match prev {
        Some(p) if p != dir => params.m / 2,
        _ => params.m,
    };
    let d = units as f64 * params.c1 * PI;
    TravelBudget { d, b: d / params.c }
}

pub fn move_sensor(sensor: &SensorState, dir: Direction, d: f64) -> SensorState {
    SensorState {
        theta: (sensor.theta + dir.sign() * d).rem_euclid(TAU),
        prev_dir: Some(dir),
        k: sensor.k + 1,
    }
}

pub fn check_stop(values: [f64; 3], dir: Direction, prev: Option<Direction>) -> StopFlag {
    let [a, b, c] = values.map(f64::abs);
    if b > a && b > c {
        StopFlag::LocalMax
    } else if prev.is_some_and(|p| p != dir) {
        StopFlag::Reversal
    } else {
        StopFlag::Continue
    }
}

/// Per-window log flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFlag {
    Stop(StopFlag),
    /// Extra window taken after a reversal.
    Final,
    /// Loop cut at `max_windows`.
    Limit,
}

impl fmt::Display for WindowFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowFlag::Stop(s) => f.write_str(s.label()),
            WindowFlag::Final => f.write_str("final"),
            WindowFlag::Limit => f.write_str("limit"),
        }
    }
}

/// One row of the movement log.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowLog {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub theta: f64,
    /// Travel time spent before the window opened.
    pub b: f64,
    pub dir: Option<Direction>,
    /// Arc length of the move after the window.
    pub d: f64,
    pub triple: Option<EndTriple>,
    pub flag: WindowFlag,
}

#[derive(Debug, Clone)]
pub struct StrategyOutcome<P> {
    pub windows: Vec<WindowLog>,
    /// One posterior per inference, in window order.
    pub posteriors: Vec<P>,
    pub data: MeasurementSet,
    pub stop: WindowFlag,
    /// Sensor position after the last move.
    pub final_theta: f64,
}

impl<P> StrategyOutcome<P> {
    pub fn final_posterior(&self) -> &P {
        self.posteriors.last().expect("at least one inference")
    }

    pub fn sensor_path(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.theta).collect()
    }

    /// `(start, end)` of every sensing window.
    pub fn window_spans(&self) -> Vec<(f64, f64)> {
        self.windows.iter().map(|w| (w.t_start, w.t_end)).collect()
    }
}

/// Runs the Measure–Infer–Move loop from `theta0`.
///
/// `infer(data, k, last)` is called once per window on all accumulated
/// records; `last` is set only for the extra window after a reversal.
pub fn run_strategy<P, R, F>(
    params: &StrategyParams,
    truth: &mut dyn TruthFlux,
    theta0: f64,
    sigma: f64,
    rng: &mut R,
    mut infer: F,
) -> Result<StrategyOutcome<P>, StrategyError>
where
    R: Rng + ?Sized,
    F: FnMut(&MeasurementSet, usize, bool) -> Result<P, StrategyError>,
{
    params.validate()?;
    if !(sigma >= 0.0) {
        return Err(StrategyError::Config(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let len = params.window_length();
    let mut sensor = SensorState::new(theta0);
    let mut data = MeasurementSet::default();
    let mut windows = Vec::new();
    let mut posteriors = Vec::new();
    let mut t_k = 0.0;
    let mut b_k = 0.0;

    loop {
        let k = sensor.k;
        let start = t_k + b_k;
        let end = start + len;
        let recs = sample_window(k, &sensor, start, end, params.n_t, truth, sigma, rng)?;
        data.records.extend(recs);
        posteriors.push(infer(&data, k, false)?);

        let triple = measure_triple(k, sensor.theta, end, params.delta_theta, truth, sigma, rng)?;
        data.triples.push(triple);
        let dir = decide_direction(angular_derivative(triple.values, params.delta_theta));
        let prev = sensor.prev_dir;
        let budget = step_size(dir, prev, params);
        let moved = move_sensor(&sensor, dir, budget.d);
        let stop = check_stop(triple.values, dir, prev);
        let mut flag = WindowFlag::Stop(stop);
        if stop == StopFlag::Continue && k + 1 >= params.max_windows {
            flag = WindowFlag::Limit;
        }
        windows.push(WindowLog {
            k,
            t_start: start,
            t_end: end,
            theta: sensor.theta,
            b: b_k,
            dir: Some(dir),
            d: budget.d,
            triple: Some(triple),
            flag,
        });
        sensor = moved;
        t_k = end;
        b_k = budget.b;

        match flag {
            WindowFlag::Stop(StopFlag::Continue) => continue,
            WindowFlag::Stop(StopFlag::Reversal) => {
                let k = sensor.k;
                let start = t_k + b_k;
                let end = start + len;
                let recs = sample_window(k, &sensor, start, end, params.n_t, truth, sigma, rng)?;
                data.records.extend(recs);
                posteriors.push(infer(&data, k, true)?);
                windows.push(WindowLog {
                    k,
                    t_start: start,
                    t_end: end,
                    theta: sensor.theta,
                    b: b_k,
                    dir: None,
                    d: 0.0,
                    triple: None,
                    flag: WindowFlag::Final,
                });
                return Ok(StrategyOutcome {
                    windows,
                    posteriors,
                    data,
                    stop: WindowFlag::Stop(StopFlag::Reversal),
                    final_theta: sensor.theta,
                });
            }
            other => {
                return Ok(StrategyOutcome {
                    windows,
                    posteriors,
                    data,
                    stop: other,
                    final_theta: sensor.theta,
                });
            }
        }
    }
}

/// Baseline with the sensor frozen at `theta` over the given windows,
/// followed by one inference on all records.
pub fn run_fixed_sensor<P, R, F>(
    n_t: usize,
    truth: &mut dyn TruthFlux,
    theta: f64,
    spans: &[(f64, f64)],
    sigma: f64,
    rng: &mut R,
    infer: F,
) -> Result<(MeasurementSet, P), StrategyError>
where
    R: Rng + ?Sized,
    F: FnOnce(&MeasurementSet, usize, bool) -> Result<P, StrategyError>,
{
    if spans.is_empty() {
        return Err(StrategyError::Config("no sensing windows".into()));
    }
    let sensor = SensorState::new(theta);
    let mut data = MeasurementSet::default();
    for (k, &(start, end)) in spans.iter().enumerate() {
        data.records
            .extend(sample_window(k, &sensor, start, end, n_t, truth, sigma, rng)?);
    }
    let p = infer(&data, spans.len() - 1, true)?;
    Ok((data, p))
}

/// Writes the movement log as `k,T_start,T_end,theta,dir,d_k,b_k,stop_flag`.
pub fn write_movement_csv<W: Write>(out: &mut W, windows: &[WindowLog]) -> std::io::Result<()> {
    writeln!(out, "k,T_start,T_end,theta,dir,d_k,b_k,stop_flag")?;
    for w in windows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            w.k,
            w.t_start,
            w.t_end,
            w.theta,
            w.dir.map_or("none", Direction::label),
            w.d,
            w.b,
            w.flag
        )?;
    }
    Ok(())
}

/// Replays logged moves from the first window's angle.
pub fn replay_path(windows: &[WindowLog]) -> Option<f64> {
    let first = windows.first()?;
    let mut s = SensorState::new(first.theta);
    for w in windows {
        if let Some(dir) = w.dir {
            s = move_sensor(&s, dir, w.d);
        }
    }
    Some(s.theta)
}

/// Shortest angular distance on the circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
