use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatsleuth_core::experiment::{
    emit_plots, oracle_compare, run_experiment, validate_config, ExperimentConfig, ExperimentError,
};

/// Moving-sensor source identification for the heat equation on the unit disc.
///
/// Any `--key=value` argument of `run` that is not one of its flags overrides
/// the config key of the same name.
#[derive(Parser)]
#[command(name = "heatsleuth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Master seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run this many consecutive seeds concurrently, one subdirectory each.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Accept a fine grid that is not finer than the coarse grid.
        #[arg(long)]
        allow_inverse_crime: bool,
    },
    /// Render SVG plots from a run directory.
    Plot { run_dir: PathBuf },
    /// Compare FEM and eigenfunction-series boundary flux for a config.
    OracleCompare { config: PathBuf },
}

const RUN_FLAGS: &[&str] = &["seed", "out", "jobs", "allow-inverse-crime", "help"];

/// Pulls `--key=value` overrides out of the arguments of `run`.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    if args.get(1).map(String::as_str) != Some("run") {
        return (args, Vec::new());
    }
    let mut keep = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        if let Some((k, v)) = a.strip_prefix("--").and_then(|r| r.split_once('=')) {
            if !RUN_FLAGS.contains(&k) {
                overrides.push((k.to_string(), v.to_string()));
                continue;
            }
        }
        keep.push(a);
    }
    (keep, overrides)
}

fn load(path: &Path, overrides: &[(String, String)]) -> Result<(ExperimentConfig, Vec<String>), ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let (cfg, warnings) = validate_config(&text, overrides)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok((cfg, warnings))
}

fn run(
    config: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: usize,
    allow_inverse_crime: bool,
    mut overrides: Vec<(String, String)>,
) -> Result<(), ExperimentError> {
    if allow_inverse_crime {
        overrides.push(("allow_inverse_crime".into(), "true".into()));
    }
    if let Some(s) = seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    let (cfg, warnings) = load(config, &overrides)?;
    if jobs == 0 {
        return Err(ExperimentError::Invalid("--jobs must be at least 1".into()));
    }
    let base = out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", cfg.kind, cfg.seed)));
    if jobs == 1 {
        let art = run_experiment(&cfg, &warnings, &base)?;
        println!("wrote {} files to {}", art.all().len(), art.dir.display());
        return Ok(());
    }
    let results: Vec<Result<PathBuf, ExperimentError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs as u64)
            .map(|j| {
                let mut c = cfg.clone();
                c.seed = cfg.seed + j;
                let dir = base.join(format!("seed-{}", c.seed));
                let warnings = &warnings;
                s.spawn(move || run_experiment(&c, warnings, &dir).map(|a| a.dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(ExperimentError::Numerical("worker panicked".into())))
            })
            .collect()
    });
    let mut first_err = None;
    for r in results {
        match r {
            Ok(dir) => println!("wrote {}", dir.display()),
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            jobs,
            allow_inverse_crime,
        } => run(&config, seed, out, jobs, allow_inverse_crime, overrides),
        Command::Plot { run_dir } => emit_plots(&run_dir).map(|p| println!("wrote {} plots", p.len())),
        Command::OracleCompare { config } => load(&config, &[]).and_then(|(cfg, _)| {
            let report = oracle_compare(&cfg)?;
            print!("{}", report.render());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
