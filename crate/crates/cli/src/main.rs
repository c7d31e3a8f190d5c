use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dispctl::commands::run_sweep;
use dispctl::{CliError, Command, RunOptions, Sweep, load_scenario, run};
use dispctl_core::Exec;

/// Exact controls and stabilizing feedback for linear dispersive equations on the torus.
#[derive(Parser)]
#[command(name = "dispctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cluster the spectrum and report the criterion and gap constants.
    Analyze(Common),
    /// Build a moment-method control; writes the coefficients and q_j samples.
    Synthesize(Common),
    /// Steer with the synthesized control and record the trajectory.
    Simulate(Common),
    /// Run the closed loop and fit its decay rate.
    Stabilize {
        #[command(flatten)]
        common: Common,
        /// Replace the feedback by K = 0.
        #[arg(long)]
        zero_feedback: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, env = "DISPCTL_OUT", default_value = "out")]
    out: PathBuf,
    /// Seed for random field presets, overriding the scenario's.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep one parameter: `param=start:stop:count` or `param=v1,v2,...`.
    #[arg(long)]
    sweep: Option<String>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, zero_feedback) = match cli.command {
        Cmd::Analyze(c) => (Command::Analyze, c, false),
        Cmd::Synthesize(c) => (Command::Synthesize, c, false),
        Cmd::Simulate(c) => (Command::Simulate, c, false),
        Cmd::Stabilize { common, zero_feedback } => (Command::Stabilize, common, zero_feedback),
    };
    match execute(command, common, zero_feedback) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, common: Common, zero_feedback: bool) -> Result<i32, CliError> {
    let opts = RunOptions {
        out: common.out,
        seed: common.seed,
        zero_feedback,
        exec: if common.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
    };
    let sweep = common.sweep.as_deref().map(str::parse::<Sweep>).transpose()?;
    let scenario = load_scenario(&common.config)?;
    match sweep {
        None => {
            println!("{}", run(command, &scenario, &opts)?);
            Ok(dispctl::EXIT_OK)
        }
        Some(sweep) => {
            let (index, worst) = run_sweep(command, &scenario, &sweep, &opts)?;
            for p in &index.points {
                println!("{}={} [{}] {}", index.param, p.value, p.dir, p.summary);
            }
            Ok(worst)
        }
    }
}
