use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use signorini_dg::estimator::AdaptiveOptions;
use signorini_dg::harness::{emit_meshes, emit_results, run_adaptive, run_convergence_study, Study};
use signorini_dg::problems::{model_problem, ProblemOverrides};
use signorini_dg::solver::DEFAULT_MAXITER;
use signorini_dg::Method;

#[derive(Parser, Debug)]
#[command(name = "signorini", version, about = "DG solver for frictionless contact problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a uniform or adaptive study and write the results as CSV.
    #[command(allow_negative_numbers = true)]
    Solve(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Sipg,
    Nipg,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sipg => Method::Sipg,
            MethodArg::Nipg => Method::Nipg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Strategy {
    Uniform,
    Adaptive,
}

#[derive(Args, Debug, Default)]
struct SolveArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    problem: Option<u32>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    strategy: Option<Strategy>,
    /// Number of uniform refinement levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Dörfler bulk fraction.
    #[arg(long)]
    theta: Option<f64>,
    /// Interior penalty; defaults to 70 (SIPG) or 70ν (NIPG).
    #[arg(long)]
    penalty: Option<f64>,
    /// Cells per side of the initial adaptive mesh.
    #[arg(long)]
    initial_n: Option<usize>,
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Stop adaptive runs after this many solves.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    quad_degree: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory for per-level mesh snapshots.
    #[arg(long)]
    emit_meshes: Option<PathBuf>,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    problem: Option<u32>,
    method: Option<MethodArg>,
    strategy: Option<Strategy>,
    levels: Option<usize>,
    theta: Option<f64>,
    penalty: Option<f64>,
    initial_n: Option<usize>,
    max_dofs: Option<usize>,
    max_iterations: Option<usize>,
    quad_degree: Option<usize>,
    output: Option<PathBuf>,
    emit_meshes: Option<PathBuf>,
    verbose: Option<bool>,
    #[serde(default)]
    parameters: ProblemOverrides,
}

/// Fully resolved settings.
#[derive(Debug)]
struct Settings {
    problem: u32,
    method: Method,
    strategy: Strategy,
    levels: usize,
    theta: f64,
    penalty: Option<f64>,
    initial_n: Option<usize>,
    max_dofs: usize,
    max_iterations: Option<usize>,
    quad_degree: usize,
    output: PathBuf,
    emit_meshes: Option<PathBuf>,
    verbose: bool,
    parameters: ProblemOverrides,
}

fn read_config(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve(args: SolveArgs) -> anyhow::Result<Settings> {
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let problem = args.problem.or(file.problem).unwrap_or(1);
    if !(1..=2).contains(&problem) {
        bail!("problem must be 1 or 2, got {problem}");
    }
    let Some(output) = args.output.or(file.output) else {
        bail!("no output path given (use --output or the `output` config key)");
    };
    Ok(Settings {
        problem,
        method: args.method.or(file.method).unwrap_or(MethodArg::Sipg).into(),
        strategy: args.strategy.or(file.strategy).unwrap_or(Strategy::Uniform),
        levels: args.levels.or(file.levels).unwrap_or(5),
        theta: args.theta.or(file.theta).unwrap_or(0.4),
        penalty: args.penalty.or(file.penalty),
        initial_n: args.initial_n.or(file.initial_n),
        max_dofs: args.max_dofs.or(file.max_dofs).unwrap_or(200_000),
        max_iterations: args.max_iterations.or(file.max_iterations),
        quad_degree: args.quad_degree.or(file.quad_degree).unwrap_or(8),
        output,
        emit_meshes: args.emit_meshes.or(file.emit_meshes),
        verbose: args.verbose || file.verbose.unwrap_or(false),
        parameters: file.parameters,
    })
}

fn print_summary(study: &Study) {
    println!(
        "{:>5} {:>9} {:>12} {:>7} {:>12} {:>8} {:>5}",
        "level", "ndofs", "error", "eoc", "estimator", "eff", "pdas"
    );
    let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
    for r in &study.records {
        println!(
            "{:>5} {:>9} {:>12} {:>7} {:>12.4e} {:>8} {:>5}",
            r.level,
            r.ndofs,
            r.error.map_or("-".to_string(), |e| format!("{e:.4e}")),
            opt(r.eoc, 4),
            r.eta_total,
            opt(r.eff_index, 3),
            r.pdas_iters
        );
    }
}

fn solve(s: &Settings) -> anyhow::Result<()> {
    if let Some(p) = s.penalty {
        if !(p > 0.0) {
            bail!("penalty must be positive, got {p}");
        }
    }
    let spec = model_problem(s.problem, &s.parameters)?;
    log::info!("{} with {} ({:?})", spec.name, s.method, s.strategy);
    let study = match s.strategy {
        Strategy::Uniform => run_convergence_study(&spec, s.method, s.penalty, s.levels, s.quad_degree)?,
        Strategy::Adaptive => {
            let opts = AdaptiveOptions {
                method: s.method,
                penalty: s.penalty,
                theta: s.theta,
                max_dofs: s.max_dofs,
                max_iterations: s.max_iterations,
                initial_n: s.initial_n,
                quad_degree: s.quad_degree,
                pdas_maxiter: DEFAULT_MAXITER,
            };
            run_adaptive(&spec, &opts)?
        }
    };
    emit_results(&study.records, &s.output)?;
    if let Some(dir) = &s.emit_meshes {
        emit_meshes(&study, dir)?;
    }
    print_summary(&study);
    Ok(())
}

fn main() -> ExitCode {
    let Command::Solve(args) = Cli::parse().command;
    let settings = match resolve(args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let level = if settings.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match solve(&settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
