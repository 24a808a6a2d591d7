use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rigid_psido_lab::{parse_config, run_scenario, run_suite, sweep, trace_table, LabError, RunOptions, Suite};

#[derive(Parser)]
#[command(name = "rigid-psido", version, about = "Euler flows on truncated pseudodifferential operator algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its CSV and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_uncertified: bool,
    },
    /// Run several scenarios in parallel, one output subdirectory each.
    Sweep {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_uncertified: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run an invariant suite and print a JSON report; exits 0 iff all gating checks pass.
    Verify {
        /// symbols, traces, pairings, dynamics, geometry or all
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the c_{k,j} trace table of a configuration's initial state.
    TraceTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_uncertified: bool,
    },
}

fn load(path: &Path) -> Result<rigid_psido_lab::ScenarioConfig, LabError> {
    parse_config(&fs::read_to_string(path)?).map_err(LabError::Config)
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn execute(cli: Cli) -> Result<bool, LabError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            allow_uncertified,
        } => {
            let cfg = load(&config)?;
            let opts = RunOptions {
                out,
                seed,
                allow_uncertified,
                base_dir: base_dir(&config),
            };
            let outcome = run_scenario(&cfg, &opts)?;
            println!("{}", outcome.csv.display());
            println!("{}", outcome.manifest.display());
            Ok(true)
        }
        Command::Sweep {
            configs,
            out,
            seed,
            allow_uncertified,
            jobs,
        } => {
            let opts = RunOptions {
                out,
                seed,
                allow_uncertified,
                base_dir: PathBuf::new(),
            };
            let entries = sweep(&configs, &opts, jobs)?;
            let mut ok = true;
            for e in &entries {
                match &e.status {
                    Ok(()) => println!("ok    {}", e.config.display()),
                    Err(msg) => {
                        ok = false;
                        println!("FAIL  {}: {msg}", e.config.display());
                    }
                }
            }
            Ok(ok)
        }
        Command::Verify { suite, seed, out } => {
            let report = run_suite(suite, seed)?;
            let text = serde_json::to_string_pretty(&report)?;
            println!("{text}");
            if let Some(path) = out {
                fs::write(path, format!("{text}\n"))?;
            }
            Ok(report.passed)
        }
        Command::TraceTable {
            config,
            seed,
            allow_uncertified,
        } => {
            let cfg = load(&config)?;
            print!("{}", trace_table(&cfg, seed, &base_dir(&config), allow_uncertified)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
