//! Flat `key = value` experiment configuration.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, blank lines are
//! ignored. Numbers accept `pi` expressions (`26pi/40`), lists are comma
//! separated, grids are `n` or `n_r,n_θ` (also `n_r x n_θ`). Every key except
//! `shape` has a default taken from the example family.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use crate::sampler::SamplerConfig;
use crate::shape::{to_unconstrained, ShapeKind, ShapeParams};
use crate::spectral::check_uniqueness_condition;
use crate::strategy::{step_size, Direction, StrategyParams};

use super::expr::eval;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}, field `{}`: {}", self.field, self.message),
            None if self.field.is_empty() => f.write_str(&self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Element counts of a polar mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
}

impl GridSpec {
    /// `n` nodes per direction maps to `⌊n/2⌋` quadratic elements.
    pub fn from_nodes(radial: usize, angular: usize) -> Self {
        Self {
            n_r: radial / 2,
            n_theta: angular / 2,
        }
    }

    fn finer_than(&self, other: &GridSpec) -> bool {
        self.n_r > other.n_r || self.n_theta > other.n_theta
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n_r, self.n_theta)
    }
}

/// How the step length relates to `m`, `c₁`, `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `d = m c₁ π`, `b = d / c` as written.
    Formula,
    /// Half steps at half speed.
    Half,
}

impl StepRule {
    pub fn name(self) -> &'static str {
        match self {
            StepRule::Formula => "formula",
            StepRule::Half => "half",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ShapeKind,
    pub fourier_order: usize,
    pub xi_true: Vec<f64>,
    pub strength: f64,
    pub sigma: f64,
    pub fine: GridSpec,
    pub coarse: GridSpec,
    pub dt: f64,
    pub load_points: usize,
    pub sampler: SamplerConfig,
    /// Iterations for windows before the last; `None` uses `sampler.n`.
    pub n_intermediate: Option<usize>,
    pub warm_start: bool,
    pub carry_beta: bool,
    pub xi_start: Vec<f64>,
    pub m: u32,
    pub c1: f64,
    pub c: f64,
    pub n_t: usize,
    /// `None` uses the coarse boundary node spacing `π / n_θ`.
    pub delta_theta: Option<f64>,
    pub window_steps: usize,
    pub max_windows: usize,
    pub step_rule: StepRule,
    pub sensor_start: f64,
    pub seed: u64,
    pub truth_seed: Option<u64>,
    pub sampler_seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub plots: bool,
    pub allow_inverse_crime: bool,
}

impl ExperimentConfig {
    /// Reference settings of the example for `kind`.
    pub fn defaults(kind: ShapeKind) -> Self {
        let (xi_true, strength, sigma, n1, n, m, c, start) = match kind {
            ShapeKind::Circle => (vec![0.7, PI / 2.0, 0.2], 50.0, 0.05, 0, 10_000, 10, 20.0 * PI, 26.0),
            ShapeKind::Kite => (vec![0.4, PI / 3.0, 0.2], 50.0, 0.05, 0, 10_000, 10, 20.0 * PI, 26.0),
            ShapeKind::FourLeaf => (vec![0.4, PI / 2.0, 0.7], 50.0, 0.05, 0, 10_000, 10, 20.0 * PI, 29.0),
            ShapeKind::FourierStar => (
                vec![1.0, 0.0, 0.0, 0.0, 0.3],
                10.0,
                0.01,
                1_000,
                15_000,
                15,
                30.0 * PI,
                4.0,
            ),
        };
        let fourier_order = if kind == ShapeKind::FourierStar { 2 } else { 0 };
        Self {
            kind,
            fourier_order,
            xi_start: default_start(kind, fourier_order),
            xi_true,
            strength,
            sigma,
            fine: GridSpec { n_r: 11, n_theta: 11 },
            coarse: GridSpec { n_r: 10, n_theta: 10 },
            dt: 1.0 / 400.0,
            load_points: crate::fem::DEFAULT_LOAD_POINTS,
            sampler: SamplerConfig {
                n1,
                n,
                ..SamplerConfig::default()
            },
            n_intermediate: None,
            warm_start: true,
            carry_beta: true,
            m,
            c1: 1.0 / 20.0,
            c,
            n_t: 80,
            delta_theta: None,
            window_steps: 80,
            max_windows: 24,
            step_rule: StepRule::Formula,
            sensor_start: start * PI / 40.0,
            seed: 0,
            truth_seed: None,
            sampler_seed: None,
            out_dir: None,
            plots: true,
            allow_inverse_crime: false,
        }
    }

    pub fn truth_shape(&self) -> ShapeParams {
        ShapeParams::new(self.kind, self.xi_true.clone(), self.fourier_order).expect("validated")
    }

    pub fn start_z(&self) -> Vec<f64> {
        to_unconstrained(&self.xi_start, self.kind)
    }

    pub fn strategy_params(&self) -> StrategyParams {
        let p = StrategyParams {
            m: self.m,
            c1: self.c1,
            c: self.c,
            n_t: self.n_t,
            delta_theta: self.delta_theta.unwrap_or(PI / self.coarse.n_theta as f64),
            window_steps: self.window_steps,
            dt: self.dt,
            max_windows: self.max_windows,
        };
        match self.step_rule {
            StepRule::Formula => p,
            StepRule::Half => p.half_step(),
        }
    }

    /// Renders the config in the file grammar; parsing the text gives it back.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let s = &self.sampler;
        let t = s.tune.unwrap_or_default();
        let mut out = vec![
            format!("shape = {}", self.kind),
            format!("fourier_order = {}", self.fourier_order),
            format!("xi_true = {}", list(&self.xi_true)),
            format!("strength = {:?}", self.strength),
            format!("sigma = {:?}", self.sigma),
            format!("fine_elements = {}", self.fine),
            format!("coarse_elements = {}", self.coarse),
            format!("dt = {:?}", self.dt),
            format!("load_points = {}", self.load_points),
            format!("beta1 = {:?}", s.beta1),
            format!("beta2 = {:?}", s.beta2),
            format!("n1 = {}", s.n1),
            format!("n = {}", s.n),
            format!("k0 = {}", s.k0),
            format!("jitter = {:?}", s.jitter),
            format!("tune = {}", s.tune.is_some()),
            format!("tune_target = {:?}", t.target),
            format!("tune_eta = {:?}", t.eta),
            format!("tune_decay = {:?}", t.decay),
            format!("tune_window = {}", t.window),
            format!("tune_fraction = {:?}", t.fraction),
            format!("warm_start = {}", self.warm_start),
            format!("carry_beta = {}", self.carry_beta),
            format!("xi_start = {}", list(&self.xi_start)),
            format!("m = {}", self.m),
            format!("c1 = {:?}", self.c1),
            format!("c = {:?}", self.c),
            format!("n_t = {}", self.n_t),
            format!("window_steps = {}", self.window_steps),
            format!("max_windows = {}", self.max_windows),
            format!("step_rule = {}", self.step_rule.name()),
            format!("sensor_start = {:?}", self.sensor_start),
            format!("seed = {}", self.seed),
            format!("plots = {}", self.plots),
            format!("allow_inverse_crime = {}", self.allow_inverse_crime),
        ];
        if let Some(n) = self.n_intermediate {
            out.push(format!("n_intermediate = {n}"));
        }
        if let Some(d) = self.delta_theta {
            out.push(format!("delta_theta = {d:?}"));
        }
        if let Some(v) = self.truth_seed {
            out.push(format!("truth_seed = {v}"));
        }
        if let Some(v) = self.sampler_seed {
            out.push(format!("sampler_seed = {v}"));
        }
        if let Some(d) = &self.out_dir {
            out.push(format!("out_dir = {}", d.display()));
        }
        out.join("\n") + "\n"
    }
}

fn default_start(kind: ShapeKind, order: usize) -> Vec<f64> {
    match kind {
        // q ≡ 1/2, the smallest admissible round start
        ShapeKind::FourierStar => {
            let mut v = vec![0.0; 2 * order + 1];
            v[0] = 1.0;
            v
        }
        // image of the prior mean z = 0
        _ => vec![0.5, PI, 0.5],
    }
}

const KEYS: &[&str] = &[
    "shape",
    "fourier_order",
    "xi_true",
    "strength",
    "sigma",
    "fine_elements",
    "fine_nodes",
    "coarse_elements",
    "coarse_nodes",
    "dt",
    "load_points",
    "beta1",
    "beta2",
    "n1",
    "n",
    "k0",
    "jitter",
    "tune",
    "tune_target",
    "tune_eta",
    "tune_decay",
    "tune_window",
    "tune_fraction",
    "n_intermediate",
    "warm_start",
    "carry_beta",
    "xi_start",
    "m",
    "c1",
    "c",
    "n_t",
    "delta_theta",
    "window_steps",
    "max_windows",
    "step_rule",
    "sensor_start",
    "seed",
    "truth_seed",
    "sampler_seed",
    "out_dir",
    "plots",
    "allow_inverse_crime",
];

struct Entry {
    line: Option<usize>,
    value: String,
}

struct Fields {
    map: BTreeMap<String, Entry>,
}

impl Fields {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.map.get(key).and_then(|e| e.line),
            field: key.to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|v| eval(v).map_err(|m| self.err(key, m))).transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.raw(key)
            .map(|v| {
                let x = eval(v).map_err(|m| self.err(key, m))?;
                if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
                    return Err(self.err(key, format!("expected a non-negative integer, got {v}")));
                }
                Ok(x as usize)
            })
            .transpose()
    }

    fn seed(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| self.err(key, format!("expected an unsigned integer, got {v}")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.raw(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(self.err(key, format!("expected true or false, got {v}"))),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|p| eval(p).map_err(|m| self.err(key, m)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }

    fn grid(&self, key: &str) -> Result<Option<(usize, usize)>, ConfigError> {
        self.raw(key)
            .map(|v| {
                let parts: Vec<&str> = v.split([',', 'x', 'X', '×']).map(str::trim).collect();
                let parse = |p: &str| {
                    p.parse::<usize>()
                        .map_err(|_| self.err(key, format!("expected a grid like `23` or `23,23`, got {v}")))
                };
                match parts.as_slice() {
                    [a] => {
                        let a = parse(a)?;
                        Ok((a, a))
                    }
                    [a, b] => Ok((parse(a)?, parse(b)?)),
                    _ => Err(self.err(key, format!("expected one or two sizes, got {v}"))),
                }
            })
            .transpose()
    }
}

fn parse_fields(text: &str, overrides: &[(String, String)]) -> Result<Fields, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                field: String::new(),
                message: format!("line {line}: expected `key = value`, got `{body}`"),
            });
        };
        let key = k.trim().to_ascii_lowercase();
        let at = |m: String| ConfigError {
            line: Some(line),
            field: key.clone(),
            message: m,
        };
        if !KEYS.contains(&key.as_str()) {
            return Err(at("unknown key".into()));
        }
        if map.contains_key(&key) {
            return Err(at("duplicate key".into()));
        }
        let value = v.trim().to_string();
        if value.is_empty() {
            return Err(at("missing value".into()));
        }
        map.insert(
            key,
            Entry {
                line: Some(line),
                value,
            },
        );
    }
    for (k, v) in overrides {
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError {
                line: None,
                field: key,
                message: "unknown override key".into(),
            });
        }
        map.insert(
            key,
            Entry {
                line: None,
                value: v.trim().to_string(),
            },
        );
    }
    Ok(Fields { map })
}

/// Parses, fills defaults and checks a config.
///
/// Returns the config and non-fatal warnings.
pub fn validate_config(
    text: &str,
    overrides: &[(String, String)],
) -> Result<(ExperimentConfig, Vec<String>), ConfigError> {
    let f = parse_fields(text, overrides)?;
    let kind: ShapeKind = match f.raw("shape") {
        Some(v) => v.parse().map_err(|e| f.err("shape", format!("{e}")))?,
        None => {
            return Err(ConfigError {
                line: None,
                field: "shape".into(),
                message: "required key is missing".into(),
            })
        }
    };
    let mut c = ExperimentConfig::defaults(kind);
    let mut warnings = Vec::new();

    if let Some(o) = f.count("fourier_order")? {
        if kind == ShapeKind::FourierStar {
            if o == 0 {
                return Err(f.err("fourier_order", "must be at least 1"));
            }
            if o != c.fourier_order {
                c.fourier_order = o;
                c.xi_start = default_start(kind, o);
                let mut xi = vec![0.0; 2 * o + 1];
                xi[0] = 1.0;
                c.xi_true = xi;
            }
        } else if o != 0 {
            return Err(f.err("fourier_order", "only used by fourier_star"));
        }
    }
    if let Some(v) = f.list("xi_true")? {
        c.xi_true = v;
    }
    ShapeParams::new(kind, c.xi_true.clone(), c.fourier_order).map_err(|e| f.err("xi_true", e.to_string()))?;
    if let Some(v) = f.list("xi_start")? {
        c.xi_start = v;
    }
    ShapeParams::new(kind, c.xi_start.clone(), c.fourier_order).map_err(|e| f.err("xi_start", e.to_string()))?;
    if kind != ShapeKind::FourierStar && c.xi_start[1] == 0.0 {
        return Err(f.err("xi_start", "the centre angle must lie strictly inside (0, 2π)"));
    }

    if let Some(v) = f.real("strength")? {
        if !(v > 0.0) {
            return Err(f.err("strength", "must be positive"));
        }
        c.strength = v;
    }
    if let Some(v) = f.real("sigma")? {
        if v < 0.0 {
            return Err(f.err("sigma", "must be non-negative"));
        }
        if v == 0.0 {
            return Err(f.err("sigma", "a zero noise level leaves the likelihood undefined"));
        }
        c.sigma = v;
    }

    let grid = |elements: &str, nodes: &str, current: GridSpec| -> Result<GridSpec, ConfigError> {
        match (f.grid(elements)?, f.grid(nodes)?) {
            (Some(_), Some(_)) => Err(f.err(nodes, format!("give either {elements} or {nodes}"))),
            (Some((a, b)), None) => Ok(GridSpec { n_r: a, n_theta: b }),
            (None, Some((a, b))) => Ok(GridSpec::from_nodes(a, b)),
            (None, None) => Ok(current),
        }
    };
    c.fine = grid("fine_elements", "fine_nodes", c.fine)?;
    c.coarse = grid("coarse_elements", "coarse_nodes", c.coarse)?;
    for (name, g) in [("fine", c.fine), ("coarse", c.coarse)] {
        if g.n_r < 1 || g.n_theta < 2 {
            let key = if f.raw(&format!("{name}_nodes")).is_some() {
                format!("{name}_nodes")
            } else {
                format!("{name}_elements")
            };
            return Err(f.err(&key, "needs at least 1 radial and 2 angular elements"));
        }
    }
    if let Some(v) = f.flag("allow_inverse_crime")? {
        c.allow_inverse_crime = v;
    }
    if !c.fine.finer_than(&c.coarse) {
        let msg = format!(
            "fine grid {} is not finer than the coarse grid {} (inverse crime)",
            c.fine, c.coarse
        );
        if c.allow_inverse_crime {
            warnings.push(msg);
        } else {
            let key = if f.raw("coarse_nodes").is_some() {
                "coarse_nodes"
            } else {
                "coarse_elements"
            };
            return Err(f.err(key, msg + "; pass --allow-inverse-crime to run anyway"));
        }
    }

    if let Some(v) = f.real("dt")? {
        if !(v > 0.0) {
            return Err(f.err("dt", "must be positive"));
        }
        c.dt = v;
    }
    if let Some(v) = f.count("load_points")? {
        if v == 0 || v > 64 {
            return Err(f.err("load_points", "must lie in 1..=64"));
        }
        c.load_points = v;
    }

    let s = &mut c.sampler;
    if let Some(v) = f.real("beta1")? {
        s.beta1 = v;
    }
    if let Some(v) = f.real("beta2")? {
        s.beta2 = v;
    }
    if let Some(v) = f.count("n1")? {
        s.n1 = v;
    }
    if let Some(v) = f.count("n")? {
        s.n = v;
    }
    if let Some(v) = f.count("k0")? {
        s.k0 = v;
    }
    if let Some(v) = f.real("jitter")? {
        s.jitter = v;
    }
    let mut tune = s.tune.unwrap_or_default();
    if let Some(v) = f.real("tune_target")? {
        tune.target = v;
    }
    if let Some(v) = f.real("tune_eta")? {
        tune.eta = v;
    }
    if let Some(v) = f.real("tune_decay")? {
        if v < 0.0 {
            return Err(f.err("tune_decay", "must be non-negative"));
        }
        tune.decay = v;
    }
    if let Some(v) = f.count("tune_window")? {
        tune.window = v;
    }
    if let Some(v) = f.real("tune_fraction")? {
        tune.fraction = v;
    }
    s.tune = match f.flag("tune")? {
        Some(false) => None,
        _ => Some(tune),
    };
    if let Err(e) = s.validate() {
        let key = sampler_field(&e.to_string());
        return Err(f.err(key, e.to_string()));
    }
    if let Some(t) = s.tune {
        if !(t.target > 0.0 && t.target < 1.0) {
            return Err(f.err("tune_target", "must lie in (0, 1)"));
        }
        if !(t.eta > 0.0) {
            return Err(f.err("tune_eta", "must be positive"));
        }
    }
    if let Some(v) = f.count("n_intermediate")? {
        if v <= c.sampler.n1 {
            return Err(f.err("n_intermediate", "must exceed n1"));
        }
        c.n_intermediate = Some(v);
    }
    if let Some(v) = f.flag("warm_start")? {
        c.warm_start = v;
    }
    if let Some(v) = f.flag("carry_beta")? {
        c.carry_beta = v;
    }

    if let Some(v) = f.count("m")? {
        c.m = u32::try_from(v).map_err(|_| f.err("m", "too large"))?;
    }
    if let Some(v) = f.real("c1")? {
        c.c1 = v;
    }
    if let Some(v) = f.real("c")? {
        c.c = v;
    }
    if let Some(v) = f.count("n_t")? {
        c.n_t = v;
    }
    if let Some(v) = f.real("delta_theta")? {
        c.delta_theta = Some(v);
    }
    if let Some(v) = f.count("window_steps")? {
        c.window_steps = v;
    }
    if let Some(v) = f.count("max_windows")? {
        c.max_windows = v;
    }
    if let Some(v) = f.raw("step_rule") {
        c.step_rule = match v.to_ascii_lowercase().as_str() {
            "formula" => StepRule::Formula,
            "half" => StepRule::Half,
            _ => return Err(f.err("step_rule", format!("expected formula or half, got {v}"))),
        };
    }
    if let Some(v) = f.real("sensor_start")? {
        c.sensor_start = v.rem_euclid(2.0 * PI);
    }
    let positive = [("c1", c.c1), ("c", c.c)];
    for (key, v) in positive {
        if !(v > 0.0) {
            return Err(f.err(key, "must be positive"));
        }
    }
    for (key, v) in [
        ("m", c.m as usize),
        ("n_t", c.n_t),
        ("window_steps", c.window_steps),
        ("max_windows", c.max_windows),
    ] {
        if v == 0 {
            return Err(f.err(key, "must be at least 1"));
        }
    }
    if let Some(d) = c.delta_theta {
        if !(d > 0.0 && d < PI) {
            return Err(f.err("delta_theta", "must lie in (0, π)"));
        }
    }

    if let Some(v) = f.seed("seed")? {
        c.seed = v;
    }
    c.truth_seed = f.seed("truth_seed")?;
    c.sampler_seed = f.seed("sampler_seed")?;
    if let Some(v) = f.raw("out_dir") {
        c.out_dir = Some(PathBuf::from(v));
    }
    if let Some(v) = f.flag("plots")? {
        c.plots = v;
    }

    let truth = c.truth_shape();
    if !truth.fits_in_disc() {
        warnings.push(format!(
            "the true source reaches radius {:.3} and is clipped by the unit disc",
            truth.max_radius()
        ));
    }
    let p = c.strategy_params();
    let d = step_size(Direction::Ccw, None, &p).d;
    if !check_uniqueness_condition(c.sensor_start, (c.sensor_start + d).rem_euclid(2.0 * PI)) {
        warnings.push(format!(
            "sensor angles {:.4} and {:.4} differ by a rational multiple of π; two dwell points may not determine the source uniquely",
            c.sensor_start,
            (c.sensor_start + d).rem_euclid(2.0 * PI)
        ));
    }
    Ok((c, warnings))
}

fn sampler_field(msg: &str) -> &'static str {
    for (needle, key) in [
        ("beta1", "beta1"),
        ("beta2", "beta2"),
        ("N1", "n1"),
        ("N must", "n"),
        ("k0", "k0"),
        ("jitter", "jitter"),
        ("tuning window", "tune_window"),
        ("tuning fraction", "tune_fraction"),
    ] {
        if msg.contains(needle) {
            return key;
        }
    }
    "tune"
}
