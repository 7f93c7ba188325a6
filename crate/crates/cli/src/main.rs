//! `fbp`: run the tumor-growth solver and its verification studies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use fbp_core::driver::output::{write_trajectory_csv, RunManifest};
use fbp_core::driver::snapshot::{load_snapshot, save_snapshot};
use fbp_core::verify::study::{reproduce_tables, run_convergence_study, stability_csv, stability_sweep, Vary};
use fbp_core::{FbpError, Problem, Result, SolverConfig, Stepper};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("FBP_GIT_DESCRIBE"), ")");

#[derive(Parser)]
#[command(name = "fbp", version = VERSION, about = "Fractional free-boundary tumor growth solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file with `key = value` lines; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (created if missing). Falls back to `output_dir`
    /// from the config, then to `fbp-output`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes trajectory.csv, final.snapshot and manifest.txt.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Continue from a snapshot written by an earlier run of the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Stop after this many total steps instead of running to `steps`.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Error and order tables of the manufactured problem.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Refine `time` (steps) or `space` (degree).
        #[arg(long)]
        vary: String,
        /// Comma-separated levels, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        /// Fractional order (overrides the config).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Deviation between unperturbed and perturbed runs.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Comma-separated perturbation sizes.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        epsilon: Vec<f64>,
    },
    /// Time-error, time-order and space-error tables.
    Tables {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<SolverConfig> {
    let mut text = match &common.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| FbpError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        // Appending keeps the model-dependent defaults consistent with
        // overridden keys.
        text.push_str(&format!("\n{} = {}\n", k.trim(), v.trim()));
    }
    let cfg = SolverConfig::parse(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(common: &Common, cfg: &SolverConfig) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fbp-output"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(dir: &Path, command: &str, cfg: &SolverConfig, start: Instant, stats: Option<fbp_core::RunStats>) -> Result<()> {
    RunManifest {
        version: VERSION.to_string(),
        command: command.to_string(),
        config: cfg.clone(),
        wall_time: start.elapsed(),
        stats,
    }
    .write(&dir.join("manifest.txt"))
}

fn solve(common: &Common, resume: Option<&Path>, stop_after: Option<usize>) -> Result<()> {
    let start = Instant::now();
    let cfg = load_config(common)?;
    let dir = output_dir(common, &cfg)?;
    let problem = Problem::from_config(&cfg)?;
    let mut stepper = match resume {
        Some(path) => {
            let (hash, state) = load_snapshot(path)?;
            if hash != cfg.hash() {
                return Err(FbpError::Config(format!(
                    "snapshot {} was written with config hash {hash}, current config hashes to {}",
                    path.display(),
                    cfg.hash()
                )));
            }
            Stepper::resume(problem, state)?
        }
        None => Stepper::new(problem)?,
    };
    let last = stop_after.unwrap_or(cfg.steps).min(cfg.steps);
    let stride = cfg.output_stride;
    let mut trajectory = vec![stepper.snapshot()];
    while stepper.state().step < last {
        stepper.step()?;
        let n = stepper.state().step;
        if n % stride == 0 || n == last {
            trajectory.push(stepper.snapshot());
        }
    }
    write_trajectory_csv(&dir.join("trajectory.csv"), &trajectory, cfg.n_total)?;
    save_snapshot(&dir.join("final.snapshot"), stepper.state(), &cfg.hash())?;
    let stats = stepper.stats().clone();
    info!(
        "{} steps, final R = {}, clamp fraction {:e}",
        stats.steps,
        stepper.state().radius,
        stats.clamp_fraction()
    );
    write_manifest(&dir, "solve", &cfg, start, Some(stats))
}

fn convergence(common: &Common, vary: &str, levels: &[usize], alpha: Option<f64>) -> Result<()> {
    let start = Instant::now();
    let vary: Vary = vary.parse()?;
    let mut cfg = load_config(common)?;
    if let Some(a) = alpha {
        cfg.alpha = a;
        cfg.validate()?;
    }
    if levels.len() < 2 {
        return Err(FbpError::Config("--levels needs at least two levels to estimate orders".into()));
    }
    let dir = output_dir(common, &cfg)?;
    let study = run_convergence_study(&cfg, vary, levels)?;
    fs::write(dir.join("errors.csv"), study.error_csv())?;
    fs::write(dir.join("orders.csv"), study.order_csv()?)?;
    write_manifest(&dir, "convergence", &cfg, start, None)
}

fn stability(common: &Common, epsilons: &[f64]) -> Result<()> {
    let start = Instant::now();
    let cfg = load_config(common)?;
    let dir = output_dir(common, &cfg)?;
    let reports = stability_sweep(&cfg, epsilons)?;
    fs::write(dir.join("stability.csv"), stability_csv(&reports))?;
    write_manifest(&dir, "stability", &cfg, start, None)
}

fn tables(common: &Common) -> Result<()> {
    let start = Instant::now();
    let cfg = load_config(common)?;
    let dir = output_dir(common, &cfg)?;
    let t = reproduce_tables(&cfg)?;
    fs::write(dir.join("table1_time_errors.csv"), t.time.error_csv())?;
    fs::write(dir.join("table2_time_orders.csv"), t.time.order_csv()?)?;
    fs::write(dir.join("table3_space_errors.csv"), t.space.error_csv())?;
    write_manifest(&dir, "tables", &cfg, start, None)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            common,
            resume,
            stop_after,
        } => solve(common, resume.as_deref(), *stop_after),
        Command::Convergence {
            common,
            vary,
            levels,
            alpha,
        } => convergence(common, vary, levels, *alpha),
        Command::Stability { common, epsilon } => stability(common, epsilon),
        Command::Tables { common } => tables(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbp: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
