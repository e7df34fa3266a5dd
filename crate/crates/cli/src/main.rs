use std::path::PathBuf;
use std::process::ExitCode;

use attractor_lab::config::RunConfig;
use attractor_lab::runner::{self, HarnessError};
use clap::{Args, Parser, Subcommand};

/// Spectral Galerkin simulation and verification lab for the nonlinear damped
/// wave equation.
#[derive(Parser)]
#[command(name = "attractor-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// path to the TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory (default: config output_dir, then $ATTRACTOR_LAB_OUT/<stem>, then runs/<stem>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads for ensemble experiments (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a single trajectory and record monitors and snapshots
    Simulate(RunArgs),
    /// Run a seeded trajectory ensemble and fit the absorbing ball
    Ensemble(RunArgs),
    /// Newton steady states with flow cross-checks
    Equilibria(RunArgs),
    /// Certify the supporting inequalities on search and verification grids
    Verify(RunArgs),
    /// Approximate the attractor by post-burn-in trajectory clouds
    Attractor(RunArgs),
    /// Summarize a finished run directory
    Report {
        /// run directory containing manifest.json
        run_dir: PathBuf,
    },
}

fn run_with_kind(args: RunArgs, kind: &str) -> Result<(), HarnessError> {
    let mut config = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if config.experiment.kind != kind {
        config.experiment.kind = kind.to_string();
        config.resolve_defaults();
        config.validate()?;
    }
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| HarnessError::Experiment(format!("worker pool: {e}")))?;
    }
    let out_dir = runner::resolve_out_dir(args.out, &config, &args.config);
    let manifest = runner::run(&config, &out_dir)?;
    println!(
        "{}: {} -> {}",
        manifest.experiment,
        manifest.outcome,
        out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => run_with_kind(args, "simulate"),
        Command::Ensemble(args) => run_with_kind(args, "ensemble"),
        Command::Equilibria(args) => run_with_kind(args, "equilibria"),
        Command::Verify(args) => run_with_kind(args, "verify"),
        Command::Attractor(args) => run_with_kind(args, "attractor"),
        Command::Report { run_dir } => attractor_lab::report::report(&run_dir).map(|summary| {
            print!("{}", std::fs::read_to_string(run_dir.join("summary.txt")).unwrap_or_default());
            if !summary.all_pass() {
                std::process::exit(3);
            }
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
