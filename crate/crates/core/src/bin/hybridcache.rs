//! Scenario runner for hybrid coded-uncoded cache placement experiments.
//!
//! Subcommands take a JSON scenario file and write a results CSV plus a
//! `.meta.json` sidecar. Exit codes: 0 ok, 2 scenario parse error,
//! 3 validation error, 4 instance too large for exact search.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybridcache::model::DemandMatrix;
use hybridcache::scenario::{
    emit_fig1_walkthrough, letters_to_contents, run_file, Mode, RunOverrides, ScenarioError,
};

#[derive(Parser)]
#[command(
    name = "hybridcache",
    version,
    about = "Hybrid coded-uncoded cache placement: analysis, search, and simulation"
)]
struct Cli {
    /// Worker threads for sweeps and simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's simulation slot count.
    #[arg(long)]
    slots: Option<usize>,
    /// Override the scenario's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the exact enumerated load (tiny instances only).
    #[arg(long)]
    exact_oracle: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Expected load of the placement given in the scenario.
    Analyze(RunArgs),
    /// Monte Carlo delivery simulation of the given placement.
    Simulate(RunArgs),
    /// Search for the load-minimizing placement of the scenario's scheme.
    Optimize(RunArgs),
    /// Optimize across a sweep axis (alpha range, M range, or Z vectors).
    Sweep(RunArgs),
    /// Print the fixed 3-SBS delivery walkthrough.
    Fig1 {
        /// Demand letters per SBS, comma-separated (default "ADEFJJBC,DGKA,ELMABB").
        #[arg(long)]
        demands: Option<String>,
    },
}

fn overrides(args: &RunArgs) -> RunOverrides {
    RunOverrides {
        seed: args.seed,
        slots: args.slots,
        out: args.out.clone(),
        exact_oracle: args.exact_oracle,
    }
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| ScenarioError::Validation(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Analyze(args) => report(run_file(Mode::Analyze, &args.scenario, &overrides(args))?),
        Command::Simulate(args) => {
            report(run_file(Mode::Simulate, &args.scenario, &overrides(args))?)
        }
        Command::Optimize(args) => {
            report(run_file(Mode::Optimize, &args.scenario, &overrides(args))?)
        }
        Command::Sweep(args) => report(run_file(Mode::Sweep, &args.scenario, &overrides(args))?),
        Command::Fig1 { demands } => {
            let demands = demands
                .as_ref()
                .map(|text| {
                    let per_sbs = text
                        .split(',')
                        .map(letters_to_contents)
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok::<_, ScenarioError>(DemandMatrix { per_sbs })
                })
                .transpose()?;
            print!("{}", emit_fig1_walkthrough(demands)?);
        }
    }
    Ok(())
}

fn report(out: hybridcache::scenario::RunOutput) {
    eprintln!("wrote {} row(s) to {}", out.rows, out.out_path.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
