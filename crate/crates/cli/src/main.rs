//! `ide-flows` command-line front end.
//!
//! Exit codes: 0 success, 1 property violation, 2 input error, 3 run cap reached.

mod commands;
mod plot;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ide-flows", version, about = "Exact IDE flows over time in the Vickrey queueing model")]
struct Cli {
    /// Worker threads for parallel checks and batch runs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance: `fig1`, `blocking K k`, `slow-termination K L` or `poa K L`.
    Gen {
        #[arg(required = true, num_args = 1..=3)]
        spec: Vec<String>,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the IDE flow and write trace, metrics and time series.
    Simulate {
        /// Instance JSON, or a directory of instances for a batch run.
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(short, long, default_value = ".")]
        out_dir: PathBuf,
        /// Series for the CSV export (default: F_delta, Z and every queue).
        #[arg(short, long, value_delimiter = ',')]
        series: Vec<String>,
        /// Add exact rational columns to the CSV.
        #[arg(long)]
        exact: bool,
    },
    /// Check feasibility and the IDE condition of a flow (bare flow or trace JSON).
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        flow: PathBuf,
    },
    /// Certificates, OPT bounds, PoA ratios and an optional sink-like volume scan.
    Analyze {
        #[arg(short, long)]
        input: PathBuf,
        /// Grid step of the time-expanded network.
        #[arg(long, default_value = "1")]
        delta: String,
        #[command(flatten)]
        run: RunArgs,
        /// Write a CSV of vol(V, θ, θ + window) over the run.
        #[arg(long)]
        scan: Option<PathBuf>,
        #[arg(long, default_value = "1/2")]
        scan_step: String,
        #[arg(long, default_value = "0")]
        scan_window: String,
        /// Write the time series (exact columns) of the best OPT candidate found on the grid.
        #[arg(long)]
        opt_csv: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Price-of-anarchy report.
    Poa {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value = "1")]
        delta: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Render CSV series as an SVG line chart.
    Plot {
        #[arg(short, long)]
        file: PathBuf,
        #[arg(short, long, required = true, value_delimiter = ',')]
        series: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Stop the engine at this time (default: the termination bound).
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    max_phases: usize,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Violation(String),
    Input(anyhow::Error),
    Cap(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

pub type Outcome = Result<(), Failure>;

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(anyhow::Error::from)?;
    }
    match cli.command {
        Command::Gen { spec, output } => commands::gen(&spec, output.as_deref()),
        Command::Simulate {
            input,
            run,
            out_dir,
            series,
            exact,
        } => commands::simulate(&input, &run.options()?, &out_dir, &series, exact),
        Command::Verify { input, flow } => commands::verify(&input, &flow),
        Command::Analyze {
            input,
            delta,
            run,
            scan,
            scan_step,
            scan_window,
            opt_csv,
            output,
        } => {
            let scan = match scan {
                Some(path) => Some(commands::ScanArgs {
                    path,
                    step: commands::rational(&scan_step, "--scan-step")?,
                    window: commands::rational(&scan_window, "--scan-window")?,
                }),
                None => None,
            };
            let outputs = commands::AnalyzeOutputs {
                scan,
                opt_csv,
                report: output,
            };
            commands::analyze(&input, &commands::rational(&delta, "--delta")?, &run.options()?, outputs)
        }
        Command::Poa { input, delta, run } => {
            commands::poa(&input, &commands::rational(&delta, "--delta")?, &run.options()?)
        }
        Command::Plot { file, series, output } => plot::plot(&file, &series, &output),
    }
}

impl RunArgs {
    fn options(&self) -> Result<ide_flows::IdeOptions, Failure> {
        let horizon = self.horizon.as_deref().map(|h| commands::rational(h, "--horizon")).transpose()?;
        if horizon.as_ref().is_some_and(|h| *h <= ide_flows::stepfn::q(0)) {
            return Err(Failure::Input(anyhow::anyhow!("--horizon must be positive")));
        }
        Ok(ide_flows::IdeOptions {
            horizon,
            max_phases: self.max_phases,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IDE_FLOWS_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("cap reached: {msg}");
            ExitCode::from(3)
        }
    }
}
