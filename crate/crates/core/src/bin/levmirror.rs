use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levmirror::steady_state::BranchLabel;
use levmirror::sweep::{run, summary_path, SweepConfig, SweepKind};

/// Steady states, stability maps and output-state sweeps of a cavity whose
/// upper mirror is levitated by radiation pressure.
#[derive(Parser)]
#[command(name = "levmirror", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Both steady-state branches, residuals, regime ratios and threshold power
    SteadyState(RunArgs),
    /// Stability verdict over a (kappa, Gamma) grid
    StabilityMap(RunArgs),
    /// Entropy of entanglement over (p_tilde, omega) with per-power peaks
    EntangleSweep(RunArgs),
    /// Output quadrature variances over (p_tilde, omega) with per-power minima
    VarianceSweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON parameter and grid file
    #[arg(long)]
    config: PathBuf,
    /// CSV output; a JSON summary is written next to it
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Steady-state branch, overriding the config file
    #[arg(long)]
    branch: Option<BranchLabel>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::SteadyState(a) => (SweepKind::SteadyState, a),
        Command::StabilityMap(a) => (SweepKind::StabilityMap, a),
        Command::EntangleSweep(a) => (SweepKind::EntanglementSweep, a),
        Command::VarianceSweep(a) => (SweepKind::VarianceSweep, a),
    };
    let result = SweepConfig::from_json_file(&args.config).and_then(|mut config| {
        if args.branch.is_some() {
            config.branch = args.branch;
        }
        run(kind, &config, &args.out, args.threads)
    });
    match result {
        Ok(()) => {
            eprintln!(
                "wrote {} and {}",
                args.out.display(),
                summary_path(&args.out).display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("levmirror: {e}");
            ExitCode::FAILURE
        }
    }
}
