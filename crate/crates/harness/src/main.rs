use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use escape_lab::{emit_report, exit, run_experiment, scenario_dir, table, ExperimentConfig, OUTPUT_ENV};

#[derive(Parser)]
#[command(name = "escape-lab", version, about = "Runs the minimal-velocity decay experiments")]
struct Cli {
    /// Print the report table to stdout.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run { config: PathBuf },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// List the shipped scenarios.
    ListScenarios {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::from_file(path).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(exit::CONFIG_ERROR as u8)
    })
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    root.join(&cfg.output.dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok", cfg.name);
                ExitCode::from(exit::PASS as u8)
            }
            Err(code) => code,
        },
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let (summary, timings) = run_experiment(&cfg);
            let dir = output_dir(&cfg);
            if let Err(e) = emit_report(&summary, &timings, &dir) {
                eprintln!("cannot write {}: {e}", dir.display());
                return ExitCode::from(exit::RUNTIME_ERROR as u8);
            }
            if cli.verbose {
                print!("{}", table(&summary));
            }
            println!("{}: {} (outputs in {})", cfg.name, if summary.passed { "PASS" } else { "FAILED" }, dir.display());
            let code = match (&summary.failure, summary.passed) {
                (Some(f), _) => {
                    eprintln!("stage `{}` failed: {}", f.stage, f.error);
                    exit::RUNTIME_ERROR
                }
                (None, true) => exit::PASS,
                (None, false) => exit::ACCEPTANCE_FAILURE,
            };
            ExitCode::from(code as u8)
        }
        Command::ListScenarios { dir } => {
            let dir = dir.unwrap_or_else(scenario_dir);
            let mut entries: Vec<PathBuf> = match std::fs::read_dir(&dir) {
                Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "cfg")).collect(),
                Err(e) => {
                    eprintln!("cannot read {}: {e}", dir.display());
                    return ExitCode::from(exit::RUNTIME_ERROR as u8);
                }
            };
            entries.sort();
            for p in entries {
                let file = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                match ExperimentConfig::from_file(&p) {
                    Ok(c) => println!("{file:<24} {}", c.description),
                    Err(e) => println!("{file:<24} (invalid: {e})"),
                }
            }
            ExitCode::from(exit::PASS as u8)
        }
    }
}
