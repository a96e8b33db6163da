use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collapse_sim::{experiments, CliError, Config};

#[derive(Parser)]
#[command(
    name = "collapse-sim",
    version,
    about = "Damped spin-oscillator measurement model: figures, widths and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its artifacts.
    Run {
        /// Scenario name (builtin: fig1, fig2a, fig2b, fig3, widths, bath-convergence, bell).
        experiment: String,
        /// TOML file with `[scenario.<name>]` tables.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, env = "COLLAPSE_SIM_OUT", default_value = ".")]
        out: PathBuf,
        /// Override a scenario key, e.g. `eta=0` or `grid.t.points=101`.
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        /// Worker threads for grid evaluation.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Run the oracle suite and print a JSON report.
    Verify {
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

fn threads(n: usize) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| CliError::Numerical(e.to_string()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { experiment, config, out, params, parallel } => {
            threads(parallel)?;
            let cfg = Config::load(config.as_deref())?;
            let scenario = cfg.scenario(&experiment, &params)?;
            for artifact in experiments::run(&scenario, &out)? {
                println!("{}", artifact.summary());
            }
            Ok(())
        }
        Command::Verify { parallel } => {
            threads(parallel)?;
            let report = collapse_core::verify::run_suite()?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?;
            println!("{text}");
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::VerificationFailed(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
