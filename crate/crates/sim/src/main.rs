use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irs_sim::experiments::{self, routes};
use irs_sim::{scenes, ExperimentConfig, Runner, Scenario, SimError};

#[derive(Parser)]
#[command(name = "irs-sim", about = "Multi-IRS beam routing and training simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its result table as CSV.
    Run {
        #[arg(long)]
        scenario: String,
        /// Scene file (defaults to the scenario's built-in scene).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated values of the sweep variable.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sweep: Option<Vec<f64>>,
        /// Worker threads; defaults to IRS_SIM_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Ten times the default trial count (an explicit --trials wins).
        #[arg(long)]
        full_scale: bool,
    },
    /// Check that a scene file parses and is consistent.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the routing case-study routes as JSON.
    Routes {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<(), SimError> {
    match cmd {
        Command::Run { scenario, config, seed, trials, out, sweep, threads, full_scale } => {
            let scenario: Scenario = scenario.parse()?;
            let mut cfg = ExperimentConfig::new(scenario, seed);
            if full_scale {
                cfg = cfg.full_scale();
            }
            cfg.scene = config;
            cfg.sweep = sweep;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let runner = Runner::new(threads)?;
            let output = experiments::run(&cfg, &runner)?;
            let csv = output.table.to_csv_string()?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|source| SimError::Io { path: path.display().to_string(), source })?,
                None => print!("{csv}"),
            }
        }
        Command::Validate { config } => {
            let scene = scenes::build(&scenes::load(&config)?)?;
            println!(
                "ok: {} IRS, {} users, {} BS antennas, {} obstacles",
                scene.num_irs(),
                scene.num_users(),
                scene.num_bs_antennas(),
                scene.obstacles.len()
            );
        }
        Command::Routes { config } => {
            let base = scenes::load_or(config.as_deref(), scenes::FIG9)?;
            let (dump, ..) = routes::route_dump(&base, &routes::DEFAULT_M0)?;
            println!("{}", serde_json::to_string_pretty(&dump)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let SimError::Config(msg) = &e {
                if msg.starts_with("unknown scenario") {
                    eprintln!("usage: irs-sim run --scenario <fig6|fig7|fig8|fig9|fig11|fig13|custom> [--config <file>] [--seed <u64>] [--trials <n>] [--out <csv>]");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
