//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use heatsleuth_core::experiment::{
    compare_flux, simulate, simulate_fixed, uniform_angles, validate_config, write_artifacts, ExperimentConfig,
    ExperimentOutcome, GridSpec,
};
use heatsleuth_core::fem::{assemble, generalized_eigenvalues, PolarMesh, DEFAULT_LOAD_POINTS};
use heatsleuth_core::sampler::{run_chain, ChainOutput, IdentityForward, LikelihoodSpec, SamplerConfig, TuneConfig};
use heatsleuth_core::shape::{parameter_distance, PriorSpec, ShapeParams};
use heatsleuth_core::spectral::bessel_zeros;
use heatsleuth_core::strategy::{
    check_stop, decide_direction, step_size, Direction, StopFlag, StrategyParams, WindowFlag,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CIRCLE: &str = include_str!("../../../configs/circle.cfg");
const KITE: &str = include_str!("../../../configs/kite.cfg");
const FOUR_LEAF: &str = include_str!("../../../configs/four_leaf.cfg");
const PEANUT: &str = include_str!("../../../configs/peanut.cfg");

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn config(text: &str, overrides: &[(&str, String)]) -> ExperimentConfig {
    let o: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    validate_config(text, &o).expect("bundled config").0
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fem_vs_series() -> Verdict {
    let shape = ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap();
    let angles = uniform_angles(10);
    let times = [0.05, 0.1, 0.2];
    let report = |n: usize| {
        compare_flux(
            &shape,
            50.0,
            GridSpec { n_r: n, n_theta: n },
            1.0 / 400.0,
            DEFAULT_LOAD_POINTS,
            200,
            &angles,
            &times,
        )
        .unwrap()
    };
    // 11, 15 and 23 nodes per direction
    let reports: Vec<_> = [5, 7, 11].into_iter().map(report).collect();
    let max_abs: Vec<f64> = reports
        .iter()
        .map(|r| r.rows.iter().map(|q| (q.fem - q.spectral).abs()).fold(0.0, f64::max))
        .collect();
    let fine = &reports[2];
    let rel = fine.max_relative();
    let decreasing = max_abs.windows(2).all(|w| w[1] < w[0]);
    verdict(
        rel <= 0.02 && decreasing,
        format!(
            "max pointwise rel. error {rel:.3e} (tol 2e-2), max error / peak {:.3e}; max abs error over 11/15/23 nodes {}",
            fine.max_relative_to_peak(),
            fmt(&max_abs)
        ),
    )
}

fn eigenvalues() -> Verdict {
    let mesh = PolarMesh::new(11, 11).unwrap();
    let ev = generalized_eigenvalues(&assemble(&mesh), 5).unwrap();
    let j0 = bessel_zeros(0, 1).unwrap()[0];
    let j1 = bessel_zeros(1, 1).unwrap()[0];
    let j2 = bessel_zeros(2, 1).unwrap()[0];
    let exact = [j0 * j0, j1 * j1, j1 * j1, j2 * j2, j2 * j2];
    let worst = ev
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    verdict(
        worst <= 0.01,
        format!("fem {} vs {}, worst rel. error {worst:.2e}", fmt(&ev), fmt(&exact)),
    )
}

fn batch_se(x: &[f64]) -> f64 {
    let batches = 50;
    let len = x.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| x[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let v = means.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (v / batches as f64).sqrt()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn conjugate_toy() -> Verdict {
    let sigma: f64 = 0.5;
    let d = [1.0, -0.5, 2.0];
    let g = IdentityForward { dim: 3 };
    let lik = LikelihoodSpec::new(sigma, d.to_vec(), &g).unwrap();
    let prior = PriorSpec::from_diagonal(vec![1.0; 3]);
    let cfg = SamplerConfig {
        n: 50_000,
        k0: 2500,
        n1: 0,
        beta1: 0.3,
        beta2: 0.5,
        tune: Some(TuneConfig::default()),
        ..SamplerConfig::default()
    };
    let out = run_chain(
        &cfg,
        &lik,
        &prior,
        &DVector::zeros(3),
        None,
        &mut ChaCha8Rng::seed_from_u64(17),
    )
    .unwrap();
    let comp = |o: &ChainOutput, i: usize| -> Vec<f64> { o.retained().iter().map(|s| s[i]).collect() };
    let s2 = sigma * sigma;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let x = comp(&out, i);
        let m = mean(&x);
        worst = worst.max((m - d[i] / (1.0 + s2)).abs() / batch_se(&x));
        for j in 0..=i {
            let y = comp(&out, j);
            let my = mean(&y);
            let prod: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a - m) * (b - my)).collect();
            let target = if i == j { s2 / (1.0 + s2) } else { 0.0 };
            worst = worst.max((mean(&prod) - target).abs() / batch_se(&prod));
        }
    }
    let pri = PriorSpec::from_diagonal(vec![1.0, 0.25, 4.0]);
    let b = DMatrix::from_diagonal(&DVector::from_vec(pri.diagonal().to_vec()));
    let plain = SamplerConfig {
        n: 5000,
        n1: 4999,
        beta1: 0.4,
        tune: None,
        ..SamplerConfig::default()
    };
    let adaptive = SamplerConfig {
        n: 5000,
        n1: 0,
        beta2: 0.4,
        tune: None,
        fixed_cov: Some(b),
        ..SamplerConfig::default()
    };
    let a = run_chain(
        &plain,
        &lik,
        &pri,
        &DVector::zeros(3),
        None,
        &mut ChaCha8Rng::seed_from_u64(8),
    )
    .unwrap();
    let c = run_chain(
        &adaptive,
        &lik,
        &pri,
        &DVector::zeros(3),
        None,
        &mut ChaCha8Rng::seed_from_u64(8),
    )
    .unwrap();
    let gap = (0..4999)
        .map(|k| (&a.samples[k] - &c.samples[k]).amax())
        .fold(0.0, f64::max);
    let same_accept = (0..4999).all(|k| a.accepted[k] == c.accepted[k]);
    verdict(
        worst < 3.0 && gap < 1e-12 && same_accept,
        format!(
            "worst moment deviation {worst:.2} MC s.e. over {} retained samples; C=B chains differ by {gap:.1e}",
            out.retained().len()
        ),
    )
}

fn circle_acceptance() -> Verdict {
    let out = simulate(&config(CIRCLE, &[])).unwrap();
    let rates: Vec<f64> = out
        .strategy
        .posteriors
        .iter()
        .map(|p| p.chain.terminal_acceptance)
        .collect();
    let last = *rates.last().unwrap();
    verdict(
        (0.25..=0.35).contains(&last),
        format!(
            "terminal acceptance of the final window {last:.3} (band [0.25, 0.35]); per window {}",
            fmt(&rates)
        ),
    )
}

fn per_example<T: Send>(f: impl Fn(&'static str, &'static str) -> T + Sync) -> Vec<T> {
    let cases = [
        ("circle", CIRCLE),
        ("kite", KITE),
        ("four_leaf", FOUR_LEAF),
        ("peanut", PEANUT),
    ];
    std::thread::scope(|s| {
        let handles: Vec<_> = cases.iter().map(|&(n, t)| s.spawn(|| f(n, t))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn variance_reduction() -> Verdict {
    let results = per_example(|name, text| {
        let cfg = config(
            text,
            &[
                ("n", "2000".into()),
                ("fine_nodes", "15".into()),
                ("coarse_nodes", "13".into()),
            ],
        );
        let out = simulate(&cfg).unwrap();
        let first = &out.strategy.posteriors[0].summary;
        let last = &out.strategy.final_posterior().summary;
        let narrower = first.std_xi.iter().zip(&last.std_xi).all(|(a, b)| b < a);
        let closer = out.final_error() < out.mean_error(0);
        let ok = narrower && closer && out.strategy.posteriors.len() > 1;
        (
            ok,
            format!(
                "{name}: {} windows, std {} -> {}, error {:.3} -> {:.3}",
                out.strategy.posteriors.len(),
                fmt(&first.std_xi),
                fmt(&last.std_xi),
                out.mean_error(0),
                out.final_error()
            ),
        )
    });
    let pass = results.iter().all(|r| r.0);
    let detail: Vec<String> = results
        .into_iter()
        .map(|(ok, d)| format!("{d} [{}]", if ok { "ok" } else { "no" }))
        .collect();
    verdict(pass, detail.join("; "))
}

fn path_matches(out: &ExperimentOutcome, expected: &[f64]) -> (bool, String) {
    let path = out.strategy.sensor_path();
    let same = path.len() == expected.len() && path.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-9);
    let reversal_at_3 = out
        .strategy
        .windows
        .get(2)
        .is_some_and(|w| w.flag == WindowFlag::Stop(StopFlag::Reversal));
    let in_units: Vec<f64> = path.iter().map(|t| t * 40.0 / PI).collect();
    let flags: Vec<String> = out.strategy.windows.iter().map(|w| w.flag.to_string()).collect();
    (
        same && reversal_at_3,
        format!("path {}·π/40, flags {}", fmt(&in_units), flags.join("/")),
    )
}

fn sensor_paths() -> Verdict {
    let circle = simulate(&config(CIRCLE, &[])).unwrap();
    let peanut = simulate(&config(PEANUT, &[])).unwrap();
    let (a, da) = path_matches(&circle, &[26.0, 16.0, 6.0, 11.0].map(|k| k * PI / 40.0));
    let (b, db) = path_matches(&peanut, &[4.0, 19.0, 34.0, 27.0].map(|k| k * PI / 40.0));
    verdict(a && b, format!("circle {da}; peanut {db}"))
}

fn branch_table() -> Verdict {
    use Direction::{Ccw, Cw};
    let mut failures = Vec::new();
    for (phi, want) in [(0.5, Ccw), (-0.5, Cw), (0.0, Cw), (f64::MIN_POSITIVE, Ccw), (-0.0, Cw)] {
        if decide_direction(phi) != want {
            failures.push(format!("direction({phi})"));
        }
    }
    let p = StrategyParams {
        m: 10,
        c1: 1.0 / 20.0,
        c: 20.0 * PI,
        ..StrategyParams::standard(PI / 10.0)
    };
    let q = StrategyParams {
        m: 15,
        c1: 1.0 / 20.0,
        c: 30.0 * PI,
        ..p.clone()
    };
    let steps = [
        (&p, Cw, None, PI / 2.0, 1.0 / 40.0),
        (&p, Ccw, None, PI / 2.0, 1.0 / 40.0),
        (&p, Cw, Some(Cw), PI / 2.0, 1.0 / 40.0),
        (&p, Ccw, Some(Ccw), PI / 2.0, 1.0 / 40.0),
        (&p, Cw, Some(Ccw), PI / 4.0, 1.0 / 80.0),
        (&p, Ccw, Some(Cw), PI / 4.0, 1.0 / 80.0),
        (&q, Ccw, Some(Ccw), 3.0 * PI / 4.0, 1.0 / 40.0),
        (&q, Cw, Some(Ccw), 7.0 * PI / 20.0, 7.0 / 600.0),
    ];
    for (params, dir, prev, d, b) in steps {
        let t = step_size(dir, prev, params);
        if (t.d - d).abs() > 1e-14 || (t.b - b).abs() > 1e-14 {
            failures.push(format!("step({dir:?}, {prev:?}, m={})", params.m));
        }
    }
    let peak = [0.1, 0.3, 0.1];
    let flat = [0.1, 0.1, 0.1];
    let ramp = [0.1, 0.2, 0.3];
    let neg_peak = [-0.1, -0.3, 0.2];
    for (vals, is_peak) in [(peak, true), (flat, false), (ramp, false), (neg_peak, true)] {
        for dir in [Cw, Ccw] {
            for prev in [None, Some(Cw), Some(Ccw)] {
                let want = if is_peak {
                    StopFlag::LocalMax
                } else if prev.is_some_and(|q| q != dir) {
                    StopFlag::Reversal
                } else {
                    StopFlag::Continue
                };
                if check_stop(vals, dir, prev) != want {
                    failures.push(format!("stop({vals:?}, {dir:?}, {prev:?})"));
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "5 direction, 8 step and 24 stop cases".into()
        } else {
            failures.join(", ")
        },
    )
}

fn determinism() -> Verdict {
    let cfg = config(
        CIRCLE,
        &[("n", "2000".into()), ("seed", "7".into()), ("plots", "false".into())],
    );
    let base = std::env::temp_dir().join(format!("heatsleuth-acceptance-{}", std::process::id()));
    let dirs = [base.join("a"), base.join("b")];
    let arts: Vec<_> = dirs
        .iter()
        .map(|d| write_artifacts(&simulate(&cfg).unwrap(), &[], d).unwrap())
        .collect();
    let mut same = arts[0].chain_csvs.len() == arts[1].chain_csvs.len();
    for (a, b) in arts[0].chain_csvs.iter().zip(&arts[1].chain_csvs) {
        same &= fs::read(a).unwrap() == fs::read(b).unwrap();
    }
    let n = arts[0].chain_csvs.len();
    let _ = fs::remove_dir_all(&base);
    verdict(same, format!("{n} chain files compared byte for byte"))
}

/// One-sided sign test: P(X ≥ wins) for X ~ Bin(n, 1/2).
fn sign_test(wins: usize, n: usize) -> f64 {
    let mut c = 1.0;
    let mut tail = 0.0;
    for k in 0..=n {
        if k >= wins {
            tail += c;
        }
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    tail / 2f64.powi(n as i32)
}

fn small_budget() -> Verdict {
    let seeds: Vec<u64> = (1..=10).collect();
    let results: Vec<(f64, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                s.spawn(move || {
                    let cfg = config(CIRCLE, &[("n", "500".into()), ("seed", seed.to_string())]);
                    let moving = simulate(&cfg).unwrap();
                    let spans = moving.strategy.window_spans();
                    let (_, fixed) = simulate_fixed(&cfg, &spans).unwrap();
                    let fixed_err = parameter_distance(&fixed.summary.mean_xi, moving.truth.xi(), cfg.kind);
                    (moving.final_error(), fixed_err)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let wins = results.iter().filter(|(m, f)| m < f).count();
    let p = sign_test(wins, results.len());
    let moving: Vec<f64> = results.iter().map(|r| r.0).collect();
    let fixed: Vec<f64> = results.iter().map(|r| r.1).collect();
    verdict(
        p <= 0.05,
        format!(
            "moving better in {wins}/{} seeds, sign test p = {p:.4}; moving {}, fixed {}",
            results.len(),
            fmt(&moving),
            fmt(&fixed)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("FEM flux vs eigenfunction series", fem_vs_series),
        ("smallest generalized eigenvalues", eigenvalues),
        ("sampler on the conjugate Gaussian toy", conjugate_toy),
        ("circle terminal acceptance band", circle_acceptance),
        ("variance reduction across windows", variance_reduction),
        ("reference sensor paths", sensor_paths),
        ("movement rule branch table", branch_table),
        ("bit-identical chains", determinism),
        ("moving vs fixed sensor at N=500", small_budget),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {}: {} ({:.1}s) {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            t0.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
