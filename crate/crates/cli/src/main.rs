use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rannlr_core::baseline::{baseline_primal_dual, BaselineConfig};
use rannlr_core::experiment::{alp_preset, sip_preset, ExperimentConfig};
use rannlr_core::instances::{build_alp_with, build_sip, AlpOptions};
use rannlr_core::rescaling::uniform_grid;
use rannlr_core::{
    solve, solve_with_observer, verify_properties, BaseFunction, Error, Lambda0, OuterIterations, ProblemInstance,
    RescalingFunction, RunReport, SamplerKind, SamplingDistribution, SamplingPolicy, SolverConfig, SubroutineKind,
};

#[derive(Parser)]
#[command(name = "rannlr", version, about = "Randomized nonlinear rescaling solver and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the experiment described by a JSON config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a benchmark instance.
    Bench {
        #[command(subcommand)]
        target: Target,
    },
    /// Run the primal-dual subgradient baseline.
    Baseline {
        #[command(subcommand)]
        target: BaselineTarget,
    },
    /// Check the rescaling-function properties on a grid and print the report.
    CheckPsi {
        #[arg(long, default_value = "exp")]
        kind: BaseFunction,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        grid_lo: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        grid_hi: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Write the sampling distribution at chosen outer iterations as CSV.
    DumpSampling {
        /// Comma-separated outer iterations, e.g. 5,80.
        #[arg(long, value_delimiter = ',', required = true)]
        at_iters: Vec<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(subcommand)]
        target: Target,
    },
}

#[derive(Subcommand)]
enum Target {
    /// Discretized semi-infinite program.
    Sip {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Inventory-control approximate linear program.
    Alp {
        #[arg(long, default_value_t = 0.2)]
        precision: f64,
        #[arg(long, default_value_t = 600.0)]
        beta: f64,
        /// Strong-convexity term added to the objective.
        #[arg(long, default_value_t = 0.0)]
        tikhonov: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum BaselineTarget {
    Sip {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 30_000)]
        steps: u64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1000)]
        record_every: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sub {
    Sgd,
    Svrg,
    Full,
}

impl From<Sub> for SubroutineKind {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Sgd => SubroutineKind::Sgd,
            Sub::Svrg => SubroutineKind::Svrg,
            Sub::Full => SubroutineKind::FullGradient,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Dual,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Cumulative,
    Alias,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "svrg")]
    subroutine: Sub,
    /// Scaling parameter N.
    #[arg(long = "scaling-N")]
    scaling_n: Option<f64>,
    /// Inner stationarity tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// SVRG epoch length.
    #[arg(long = "epoch-M")]
    epoch_m: Option<u64>,
    /// Constant step size.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    outer_iters: Option<usize>,
    /// Initial value of every dual.
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    max_inner: Option<u64>,
    #[arg(long)]
    check_interval: Option<u64>,
    #[arg(long, value_enum, default_value = "dual")]
    sampling: Sampling,
    #[arg(long, value_enum, default_value = "cumulative")]
    sampler: Sampler,
    /// Start every inner run from x⁰ instead of the previous iterate.
    #[arg(long)]
    cold_start: bool,
    #[arg(long)]
    stall_patience: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut SolverConfig) {
        let sub = &mut cfg.subroutine;
        sub.kind = self.subroutine.into();
        sub.sampling = match self.sampling {
            Sampling::Dual => SamplingPolicy::DualProportional,
            Sampling::Uniform => SamplingPolicy::Uniform,
        };
        sub.sampler = match self.sampler {
            Sampler::Cumulative => SamplerKind::Cumulative,
            Sampler::Alias => SamplerKind::Alias,
        };
        if let Some(v) = self.epoch_m {
            sub.epoch_length = v;
        }
        if let Some(v) = self.step {
            sub.constant_step = v;
        }
        if let Some(v) = self.max_inner {
            sub.max_inner_iters = v;
        }
        if let Some(v) = self.check_interval {
            sub.check_interval = v;
        }
        if let Some(v) = self.scaling_n {
            cfg.scaling = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.outer_iters {
            cfg.outer_iterations = OuterIterations::Fixed(v);
        }
        if let Some(v) = self.lambda0 {
            cfg.lambda0 = Lambda0::Constant(v);
        }
        if let Some(v) = self.stall_patience {
            cfg.stall_patience = v;
        }
        cfg.master_seed = self.seed;
        cfg.warm_start = !self.cold_start;
    }
}

#[derive(Args)]
struct OutputArgs {
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV trajectory path; defaults to the report path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write zeros in the wall_ms column so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl OutputArgs {
    fn emit(&self, report: &RunReport) -> Result<()> {
        let json = report.to_json()?;
        match &self.out {
            Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
            None => println!("{json}"),
        }
        let csv_path = self.csv.clone().or_else(|| self.out.as_ref().map(|p| p.with_extension("csv")));
        if let Some(path) = csv_path {
            fs::write(&path, report.to_csv(!self.no_timing)).with_context(|| format!("writing {}", path.display()))?;
        }
        if self.out.is_some() {
            eprintln!("{}", summary(report));
        }
        Ok(())
    }
}

fn summary(r: &RunReport) -> String {
    let gap = r.relative_gap.map_or("n/a".to_string(), |g| format!("{:.4}%", 100.0 * g));
    format!(
        "{} on {}: f = {:.10}, max violation = {:.3e}, gap = {}, outer = {}, inner = {}, {:.1} ms",
        r.algorithm,
        r.instance,
        r.final_objective,
        r.final_max_violation,
        gap,
        r.iterations.len(),
        r.total_inner_iters,
        r.solve_ms
    )
}

fn target_setup(target: &Target) -> Result<(ProblemInstance, SolverConfig, &OutputArgs)> {
    Ok(match target {
        Target::Sip { m, solver, output } => {
            let p = build_sip(*m)?;
            let kind = solver.subroutine.into();
            let mut cfg = sip_preset(*m, kind, 100.0, 20, 1e-4, 1e-4);
            solver.apply(&mut cfg);
            (p, cfg, output)
        }
        Target::Alp { precision, beta, tikhonov, solver, output } => {
            let options = AlpOptions { tikhonov: *tikhonov, ..AlpOptions::default() };
            let p = build_alp_with(*precision, *beta, options)?;
            let mut cfg = alp_preset(solver.subroutine.into());
            solver.apply(&mut cfg);
            (p, cfg, output)
        }
    })
}

fn run_solve(p: &ProblemInstance, psi: &RescalingFunction, cfg: &SolverConfig, output: &OutputArgs) -> Result<()> {
    match solve(p, psi, cfg) {
        Ok(report) => output.emit(&report),
        Err(Error::SolverAbort { outer, achieved, eps, factor, patience, report }) => {
            output.emit(&report)?;
            Err(Error::SolverAbort { outer, achieved, eps, factor, patience, report }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { config, output } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let exp = ExperimentConfig::from_json(&text)?;
            let p = exp.build_instance()?;
            let psi = exp.rescaling.build()?;
            run_solve(&p, &psi, &exp.solver, &output)
        }
        Command::Bench { target } => {
            let (p, cfg, output) = target_setup(&target)?;
            run_solve(&p, &RescalingFunction::default(), &cfg, output)
        }
        Command::Baseline { target: BaselineTarget::Sip { m, steps, step, record_every, output } } => {
            let p = build_sip(m)?;
            let cfg = BaselineConfig { steps, step, record_every, ..BaselineConfig::default() };
            output.emit(&baseline_primal_dual(&p, &cfg)?)
        }
        Command::CheckPsi { kind, tau, grid_lo, grid_hi, step } => {
            let psi = RescalingFunction::extrapolated(kind, tau)?;
            let grid = uniform_grid(grid_lo, grid_hi, step)?;
            let report = verify_properties(&psi, &grid)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::DumpSampling { at_iters, out_dir, target } => {
            let (p, mut cfg, output) = target_setup(&target)?;
            let last = at_iters.iter().copied().max().unwrap_or(0);
            if let OuterIterations::Fixed(k) = cfg.outer_iterations {
                cfg.outer_iterations = OuterIterations::Fixed(k.max(last));
            }
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let mut write_err = None;
            if at_iters.contains(&0) {
                write_err = write_dump(&out_dir, 0, &SamplingDistribution::scaled(&cfg.lambda0.build(p.num_constraints())?)).err();
            }
            let psi = RescalingFunction::default();
            let report = solve_with_observer(&p, &psi, &cfg, |snap| {
                if write_err.is_none() && at_iters.contains(&snap.k) {
                    write_err = write_dump(&out_dir, snap.k, &SamplingDistribution::scaled(snap.dual)).err();
                }
            })?;
            if let Some(e) = write_err {
                return Err(e);
            }
            output.emit(&report)
        }
    }
}

fn write_dump(dir: &Path, k: usize, dist: &SamplingDistribution) -> Result<()> {
    let path = dir.join(format!("sampling_k{k}.csv"));
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    dist.write_csv(std::io::BufWriter::new(file))?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_config_error() => 2,
        Some(Error::SolverAbort { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
