use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subsetflow::flow::FlowParams;
use subsetflow_cli::{cmd_bench, cmd_retract, cmd_trace, cmd_verify, BenchArgs, VerifyArgs};
use subsetflow_cli::CliError;

/// Gradient-flow retractions on finite point sets.
#[derive(Parser)]
#[command(name = "subsetflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FlowFlags {
    /// Step-size safety factor in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    step_safety: f64,
    /// Relative separation threshold that stops the integration.
    #[arg(long, default_value_t = 1e-9)]
    collision_tol: f64,
    /// Step budget before a run is declared divergent.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
}

impl FlowFlags {
    fn params(&self) -> FlowParams {
        FlowParams {
            step_safety: self.step_safety,
            collision_tol: self.collision_tol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Retract an input set to at most k points.
    Retract {
        /// JSON document {"points": [[x, y, ...], ...]}.
        input: PathBuf,
        /// Target cardinality (>= 1).
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        flow: FlowFlags,
        /// Write the result here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate an input set to its first collision and dump the trajectory.
    Trace {
        /// JSON document {"points": [[x, y, ...], ...]}.
        input: PathBuf,
        #[command(flatten)]
        flow: FlowFlags,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also render the trajectory to this SVG file (dimension <= 2).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the seeded verification suite and report every check.
    Verify {
        /// Cardinality of sampled configurations.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Ambient dimension of sampled configurations.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Trials per randomized check.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Master seed; every substream derives from it.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        flow: FlowFlags,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time the one-step retraction over a grid of (n, dim) cells.
    Bench {
        /// Cardinalities, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n: Vec<usize>,
        /// Dimensions, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        dim: Vec<usize>,
        /// Input pairs per cell.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Master seed; every substream derives from it.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        flow: FlowFlags,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Retract {
            input,
            k,
            flow,
            output,
        } => {
            let doc = cmd_retract(&read_input(&input)?, k, &flow.params())?;
            emit(&doc, output.as_deref())?;
            Ok(0)
        }
        Command::Trace {
            input,
            flow,
            output,
            svg,
        } => {
            let (csv, rendered) = cmd_trace(&read_input(&input)?, &flow.params(), svg.is_some())?;
            emit(&csv, output.as_deref())?;
            if let (Some(path), Some(image)) = (svg.as_deref(), rendered) {
                emit(&image, Some(path))?;
            }
            Ok(0)
        }
        Command::Verify {
            n,
            dim,
            trials,
            seed,
            flow,
            output,
        } => {
            let (doc, all_passed) = cmd_verify(&VerifyArgs {
                n,
                dim,
                trials,
                seed,
                params: flow.params(),
            })?;
            emit(&doc, output.as_deref())?;
            Ok(if all_passed { 0 } else { 1 })
        }
        Command::Bench {
            n,
            dim,
            trials,
            seed,
            flow,
            output,
        } => {
            let table = cmd_bench(&BenchArgs {
                n,
                dim,
                trials,
                seed,
                params: flow.params(),
            })?;
            emit(&table, output.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // clap itself exits with status 2 on unparsable command lines.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
