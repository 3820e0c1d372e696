mod config;
mod render;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fpbandit::analysis::{analyze, constants, StructuralReport};
use fpbandit::lowerbound::{lower_bound, DEFAULT_RESOLUTION};
use fpbandit::model::{Environment, Instance, TrueParameterSpec};
use fpbandit::policies::{parse_policy_list, PolicyKind};
use fpbandit::sim::{run_batch_with, write_csv, write_scaled_csv, BatchSummary, CheckpointSchedule};
use fpbandit::{Error, Result};

use config::ExperimentConfig;

const DEFAULT_HORIZON: u64 = 100_000;
const DEFAULT_RUNS: u64 = 10;
const DEFAULT_SEED: u64 = 42;

/// Finitely parameterized bandits: structural analysis, regret constants,
/// lower bounds and reproducible regret simulations.
///
/// Exit codes: 0 ok, 1 other failure, 2 malformed JSON or usage,
/// 3 invalid instance, 4 unknown policy, 5 degenerate lower bound.
/// Arms are numbered from 1 in reports; error messages give 0-based indices.
#[derive(Debug, Parser)]
#[command(name = "fpbandit", version)]
struct Cli {
    /// Experiment config (JSON); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (CSV for `simulate`, JSON otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Instance file (JSON).
    instance: Option<PathBuf>,
    /// True parameter: a name, or a means vector such as `[0.4,0.3,0.2,0.2]`.
    #[arg(long = "true")]
    truth: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime classification, confusion sets and constants.
    Analyze {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Regret-bound constants and the upper bound at a horizon.
    Constants {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(short = 'T', long)]
        horizon: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo regret curves, written as CSV plus a JSON summary.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Comma-separated policies: fp-ucb, ucb1, thompson.
        #[arg(long)]
        algos: Option<String>,
        #[arg(short = 'T', long)]
        horizon: Option<u64>,
        #[arg(short = 'R', long)]
        runs: Option<u64>,
        /// Summary JSON path (default: next to the CSV).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Also write regret(t)/ln(t) as CSV.
        #[arg(long)]
        scaled_out: Option<PathBuf>,
        #[arg(long)]
        dense_until: Option<u64>,
        #[arg(long)]
        per_decade: Option<u32>,
    },
    /// Asymptotic lower-bound constant.
    Lowerbound {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        resolution: Option<f64>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        e if e.is_invalid_instance() => 3,
        Error::UnknownPolicy(_) => 4,
        Error::Indistinguishable(_) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

struct Context {
    config: ExperimentConfig,
    seed: Option<u64>,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Context {
    fn load_instance(&self, args: &InstanceArgs) -> Result<(Instance, usize)> {
        let path = args
            .instance
            .clone()
            .or_else(|| self.config.instance.clone())
            .ok_or_else(|| Error::InvalidArgument("no instance file given".into()))?;
        let instance = Instance::from_path(&path)?;
        let spec = match &args.truth {
            Some(s) => Some(s.parse::<TrueParameterSpec>()?),
            None => self.config.true_parameter.clone(),
        };
        let truth = instance.resolve_true(spec.as_ref())?;
        Ok((instance, truth))
    }

    fn print(&self, text: &str) {
        if !self.quiet {
            let mut out = io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
        }
    }

    fn write_json<T: serde::Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("views serialize");
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let ctx = Context {
        seed: cli.seed,
        out: cli.out.clone().or_else(|| config.out.clone()),
        quiet: cli.quiet,
        config,
    };
    match cli.command {
        Command::Analyze { instance, json } => cmd_analyze(&ctx, &instance, json),
        Command::Constants {
            instance,
            horizon,
            json,
        } => cmd_constants(&ctx, &instance, horizon, json),
        Command::Simulate {
            instance,
            algos,
            horizon,
            runs,
            summary,
            scaled_out,
            dense_until,
            per_decade,
        } => {
            let mut schedule = ctx.config.checkpoints.unwrap_or_default();
            if let Some(d) = dense_until {
                schedule.dense_until = d;
            }
            if let Some(p) = per_decade {
                schedule.per_decade = p;
            }
            cmd_simulate(
                &ctx,
                &instance,
                SimulateArgs {
                    algos,
                    horizon,
                    runs,
                    summary,
                    scaled_out,
                    schedule,
                },
            )
        }
        Command::Lowerbound { instance, resolution } => cmd_lowerbound(&ctx, &instance, resolution),
    }
}

fn analysis_for(ctx: &Context, args: &InstanceArgs) -> Result<(Instance, StructuralReport)> {
    let (instance, truth) = ctx.load_instance(args)?;
    let report = analyze(&instance.params, truth)?;
    Ok((instance, report))
}

fn cmd_analyze(ctx: &Context, args: &InstanceArgs, json: bool) -> Result<()> {
    let (instance, report) = analysis_for(ctx, args)?;
    let params = &instance.params;
    let consts = constants(&report, params)?;
    let horizon = ctx.config.horizon.unwrap_or(DEFAULT_HORIZON);
    let view = render::analysis_view(params, &report, &consts, horizon);
    if let Some(out) = &ctx.out {
        ctx.write_json(out, &view)?;
    }
    if json {
        ctx.print(&serde_json::to_string_pretty(&view).expect("views serialize"));
    } else {
        ctx.print(&render::analysis_table(params, &report, &consts));
    }
    Ok(())
}

fn cmd_constants(ctx: &Context, args: &InstanceArgs, horizon: Option<u64>, json: bool) -> Result<()> {
    let (instance, report) = analysis_for(ctx, args)?;
    let consts = constants(&report, &instance.params)?;
    let horizon = horizon.or(ctx.config.horizon).unwrap_or(DEFAULT_HORIZON);
    let view = render::constants_view(&instance.params, &consts, horizon);
    if let Some(out) = &ctx.out {
        ctx.write_json(out, &view)?;
    }
    if json {
        ctx.print(&serde_json::to_string_pretty(&view).expect("views serialize"));
    } else {
        ctx.print(&render::constants_table(&view));
    }
    Ok(())
}

struct SimulateArgs {
    algos: Option<String>,
    horizon: Option<u64>,
    runs: Option<u64>,
    summary: Option<PathBuf>,
    scaled_out: Option<PathBuf>,
    schedule: CheckpointSchedule,
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FPBANDIT_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::InvalidArgument(format!("FPBANDIT_THREADS must be a positive integer, got `{v}`"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker threads: {e}")))
}

fn cmd_simulate(ctx: &Context, args: &InstanceArgs, sim: SimulateArgs) -> Result<()> {
    let policies = match (&sim.algos, &ctx.config.policies) {
        (Some(list), _) => parse_policy_list(list)?,
        (None, Some(list)) => parse_policy_list(&list.join(","))?,
        (None, None) => vec![PolicyKind::FpUcb],
    };
    let (instance, truth) = ctx.load_instance(args)?;
    let horizon = sim.horizon.or(ctx.config.horizon).unwrap_or(DEFAULT_HORIZON);
    let runs = sim.runs.or(ctx.config.runs).unwrap_or(DEFAULT_RUNS);
    let seed = ctx.seed.or(ctx.config.seed).unwrap_or(DEFAULT_SEED);
    let env = Environment::new(instance.params, truth, seed)?;

    let pool = thread_pool()?;
    let result = pool.install(|| run_batch_with(&env, &policies, horizon, runs, seed, sim.schedule))?;

    match &ctx.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
            write_csv(&result, BufWriter::new(file))?;
        }
        None if !ctx.quiet => write_csv(&result, io::stdout().lock())?,
        None => {}
    }

    let scaled_path = sim.scaled_out.or_else(|| ctx.config.scaled_out.clone());
    if let Some(path) = scaled_path {
        let file =
            File::create(&path).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
        write_scaled_csv(&result, BufWriter::new(file))?;
    }

    let summary = BatchSummary::from_result(&result);
    let summary_path = sim
        .summary
        .or_else(|| ctx.config.summary.clone())
        .or_else(|| ctx.out.as_ref().map(|p| p.with_extension("summary.json")));
    match summary_path {
        Some(path) => ctx.write_json(&path, &summary)?,
        None if !ctx.quiet => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(io::stderr(), "{text}");
        }
        None => {}
    }
    Ok(())
}

fn cmd_lowerbound(ctx: &Context, args: &InstanceArgs, resolution: Option<f64>) -> Result<()> {
    let (instance, report) = analysis_for(ctx, args)?;
    let resolution = resolution.or(ctx.config.resolution).unwrap_or(DEFAULT_RESOLUTION);
    let result = lower_bound(&instance.params, &report, resolution)?;
    let coefficient = constants(&report, &instance.params)?.log_coefficient;
    let view = render::lower_bound_view(&instance.params, &report, &result, coefficient);
    if let Some(out) = &ctx.out {
        ctx.write_json(out, &view)?;
    }
    if let Some(w) = &result.warning {
        eprintln!("warning: {w}");
    }
    ctx.print(&serde_json::to_string_pretty(&view).expect("views serialize"));
    Ok(())
}
