use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spectrum_sharing::experiments::{
    run_sweep, verify_theorems, write_csv, ExperimentConfig, Scenario,
};
use spectrum_sharing::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Spectrum-sharing capacity sweeps and AIP-vs-PIP checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config sample count.
    #[arg(long, global = true)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Attenuation sweep for one scenario, written as CSV.
    Sweep {
        /// Overrides the config scenario (er_er, er_out, out_er, out_out).
        #[arg(long)]
        scenario: Option<Scenario>,
    },
    /// AIP-vs-PIP verification suite; exits 1 if any check fails.
    Theorems,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let mut cfg = load(cli)?;
    match &cli.command {
        Command::Sweep { scenario } => {
            if let Some(s) = scenario {
                cfg.scenario = *s;
            }
            let rows = run_sweep(&cfg)?;
            write_csv(&rows, cli.out.as_deref())?;
            Ok(0)
        }
        Command::Theorems => {
            cfg.scenario = Scenario::Theorems;
            let report = verify_theorems(&cfg)?;
            match &cli.out {
                Some(path) => write!(File::create(path)?, "{report}")?,
                None => print!("{report}"),
            }
            Ok(if report.all_passed() {
                0
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            })
        }
    }
}
