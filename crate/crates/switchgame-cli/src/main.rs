use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use switchgame_io::commands::{self, parse_regime, RunConfig, SweepRange};
use switchgame_io::CliError;

#[derive(Parser)]
#[command(name = "switchgame", version, about = "Solve, verify and simulate a two-player switching game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON problem file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify and build the closed-form solution.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Points of the output grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Check the solution against the variational inequalities.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Monte Carlo estimate of the payoff under the threshold strategies.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the first N paths (at most 100) to trace.csv.
        #[arg(long, default_value_t = 0)]
        trace: usize,
        /// Starting regime of the traced paths.
        #[arg(long, default_value = "11")]
        regime: String,
    },
    /// Brute-force min-max over region thresholds.
    Search {
        #[command(flatten)]
        common: Common,
        /// Points per threshold axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "11")]
        regime: String,
    },
    /// Re-solve while one input varies.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of discount, gamma, x0, c12, c21, chi12, chi21.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
}

fn config(common: &Common) -> Result<RunConfig, CliError> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Args(format!("--threads: {e}")))?;
    }
    Ok(RunConfig::new(&common.input, &common.out))
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve { common, grid } => commands::run_solve(&RunConfig { grid, ..config(&common)? }),
        Command::Verify { common, grid } => commands::run_verify(&RunConfig { grid, ..config(&common)? }),
        Command::Simulate { common, paths, dt, horizon, seed, trace, regime } => {
            let cfg = RunConfig { paths, dt, horizon, seed, trace, regime: parse_regime(&regime)?, ..config(&common)? };
            commands::run_simulate(&cfg)
        }
        Command::Search { common, grid, regime } => {
            commands::run_search(&RunConfig { grid, regime: parse_regime(&regime)?, ..config(&common)? })
        }
        Command::Sweep { common, param, from, to, steps } => {
            commands::run_sweep(&config(&common)?, &SweepRange { param, from, to, steps })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the invalid-input status; 2 is reserved for
            // classification failures.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
