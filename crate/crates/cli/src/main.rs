//! `wildfire`: generate, solve, benchmark, render and validate instances.

mod bench;
mod gen;
mod render;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wildfire_lbbd::firedyn::{evaluate, InterdictionPlan};
use wildfire_lbbd::instance::{self, to_canonical_string, Instance};
use wildfire_lbbd::milp::{verify_solution, ExternalConfig, SolutionClaim};

use run::{BackendArg, Method, ModeArg, Params, StrengthArg, WarmStart};

#[derive(Parser)]
#[command(
    name = "wildfire",
    version,
    about = "Place wildfire suppression resources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from a preset or explicit grid parameters.
    Gen {
        #[command(flatten)]
        grid: gen::GridFlags,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print a run record.
    Solve(SolveArgs),
    /// Run a manifest of instances and methods.
    Bench {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Seconds per run; overrides the manifest.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value = "bench-out")]
        out_dir: PathBuf,
        /// External solver settings (TOML).
        #[arg(long)]
        solver_config: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Draw an instance, optionally under a solution.
    Render {
        instance: PathBuf,
        solution: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Svg,
}

#[derive(clap::Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::LbbdExact)]
    method: Method,
    #[arg(long, value_enum, default_value_t = ModeArg::BranchAndCheck)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = StrengthArg::Strengthened)]
    strength: StrengthArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Reference)]
    backend: BackendArg,
    /// External solver settings (TOML); the environment overrides them.
    #[arg(long)]
    solver_config: Option<PathBuf>,
    /// `greedy`, or a solution file.
    #[arg(long)]
    warm_start: Option<String>,
    /// Seconds.
    #[arg(long, env = "WILDFIRE_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// Drop nodes the fire cannot threaten before solving.
    #[arg(long)]
    preprocess: bool,
    /// Solution file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cut dump to write (LBBD methods).
    #[arg(long)]
    cuts: Option<PathBuf>,
    /// Append the record to this file as well.
    #[arg(long)]
    record: Option<PathBuf>,
}

fn external_config(path: Option<&PathBuf>) -> Result<Option<ExternalConfig>, String> {
    match path {
        Some(p) => ExternalConfig::load(p)
            .and_then(ExternalConfig::with_env)
            .map(Some)
            .map_err(|e| format!("{}: {e}", p.display())),
        None => ExternalConfig::from_env().map_err(|e| e.to_string()),
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, String> {
    instance::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn solve(args: &SolveArgs) -> Result<(), String> {
    let inst = load_instance(&args.instance)?;
    let params = Params {
        method: args.method,
        mode: args.mode,
        strength: args.strength,
        backend: args.backend,
        warm_start: args
            .warm_start
            .clone()
            .map(WarmStart::from)
            .unwrap_or_default(),
        time_limit: args.time_limit,
        preprocess: args.preprocess,
    };
    let external = if params.backend == BackendArg::External {
        external_config(args.solver_config.as_ref())?
    } else {
        None
    };
    let hash = run::config_hash(&inst, &params).map_err(|e| e.to_string())?;
    let outcome = run::run(&inst, &params, external.as_ref()).map_err(|e| e.to_string())?;
    let record = run::record(&inst, &params.method.to_string(), &params, &outcome, hash);
    if let Some(p) = &args.out {
        run::claim(&inst, &outcome)
            .save(p)
            .map_err(|e| format!("{}: {e}", p.display()))?;
    }
    if let Some(p) = &args.cuts {
        run::write_cuts(&outcome, p).map_err(|e| e.to_string())?;
    }
    let line = serde_json::to_string(&record).map_err(|e| e.to_string())?;
    if let Some(p) = &args.record {
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(|e| format!("{}: {e}", p.display()))?;
        writeln!(f, "{line}").map_err(|e| e.to_string())?;
    }
    println!("{line}");
    eprintln!("{}", record.summary());
    Ok(())
}

fn render_cmd(
    instance: &PathBuf,
    solution: Option<&PathBuf>,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), String> {
    let inst = load_instance(instance)?;
    let plan = match solution {
        Some(p) => SolutionClaim::load(p)
            .map_err(|e| format!("{}: {e}", p.display()))?
            .plan(),
        None => InterdictionPlan::new(),
    };
    let dynamics = evaluate(&inst, &plan).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Text => render::text(&inst, &plan, &dynamics),
        Format::Svg => match render::svg(&inst, &plan, &dynamics) {
            Some(svg) => svg,
            None => {
                eprintln!("not a grid instance; writing the adjacency listing");
                render::text(&inst, &plan, &dynamics)
            }
        },
    };
    write_out(out, &text)
}

/// Exit status 0 for a valid solution, 1 for an invalid one.
fn validate(instance: &PathBuf, solution: &PathBuf) -> Result<bool, String> {
    let inst = load_instance(instance)?;
    let claim =
        SolutionClaim::load(solution).map_err(|e| format!("{}: {e}", solution.display()))?;
    let report = verify_solution(&inst, &claim);
    for e in &report.structural {
        println!("invalid: {e}");
    }
    for p in &report.violations {
        println!(
            "violation: resource at node {} at time {} but fire arrives earlier",
            p.node, p.time
        );
    }
    if !report.objective_matches() {
        let show = |v: Option<u32>| v.map_or("none".to_string(), |v| v.to_string());
        println!(
            "objective: claimed {}, recomputed {}",
            show(report.claimed),
            show(report.recomputed)
        );
    }
    for (n, claimed, actual) in &report.arrival_mismatches {
        println!("arrival: node {n} claimed {claimed}, recomputed {actual}");
    }
    for n in &report.protection_mismatches {
        println!("protection: node {n} has the wrong status");
    }
    let valid = report.is_valid();
    if valid {
        println!(
            "valid: {} resources, {} unprotected nodes",
            claim.placements.len(),
            report.recomputed.unwrap_or_default()
        );
    }
    Ok(valid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { grid, out } => grid
            .instance()
            .and_then(|inst| write_out(out.as_ref(), &to_canonical_string(&inst))),
        Command::Solve(args) => solve(args),
        Command::Bench {
            manifest,
            jobs,
            time_limit,
            out_dir,
            solver_config,
            quiet,
        } => (|| {
            let manifest = bench::Manifest::load(manifest)?;
            let needs_external = manifest
                .methods
                .iter()
                .any(|m| m.params.backend == BackendArg::External);
            let external = if needs_external {
                external_config(solver_config.as_ref())?
            } else {
                None
            };
            let options = bench::BenchOptions {
                jobs: *jobs,
                time_limit: *time_limit,
                external,
                quiet: *quiet,
            };
            let tally = bench::bench(&manifest, out_dir, &options)?;
            eprintln!(
                "{} runs, {} skipped, {} failed; summary in {}",
                tally.ran,
                tally.skipped,
                tally.failed,
                out_dir.join("summary.md").display()
            );
            if tally.failed > 0 {
                Err(format!("{} runs failed", tally.failed))
            } else {
                Ok(())
            }
        })(),
        Command::Render {
            instance,
            solution,
            format,
            out,
        } => render_cmd(instance, solution.as_ref(), *format, out.as_ref()),
        Command::Validate { instance, solution } => match validate(instance, solution) {
            Ok(true) => return ExitCode::SUCCESS,
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
