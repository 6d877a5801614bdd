use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinlab_cli::{presets, run, CliError, ExperimentConfig, TaskStatus};

/// Spectral experiments for deformed Dirac operators on flat tori.
#[derive(Parser)]
#[command(name = "spinlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a built-in preset.
    Run {
        /// Path to a TOML config.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Name of a built-in preset.
        #[arg(long)]
        preset: Option<String>,
        /// Output root; overrides SPINLAB_OUTPUT_ROOT.
        #[arg(long, env = "SPINLAB_OUTPUT_ROOT", default_value = "results")]
        out: PathBuf,
        /// Run tasks on separate threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List the built-in presets.
    ListPresets,
    /// Print the TOML source of a preset.
    ShowPreset { name: String },
}

fn load(config: Option<&Path>, preset: Option<&str>) -> Result<ExperimentConfig, CliError> {
    match (config, preset) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(name)) => presets::load(name),
        (None, None) => Err(CliError::Config("no config given".into())),
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, preset, out, parallel } => {
            let config = load(config.as_deref(), preset.as_deref())?;
            let manifest = run(&config, &out, parallel)?;
            for t in &manifest.tasks {
                let status = match t.status {
                    TaskStatus::Ok => "ok",
                    TaskStatus::CheckFailed => "check failed",
                    TaskStatus::Error => "error",
                };
                print!("[{:02}] {:<16} {status} ({:.2} s)", t.index, t.kind, t.wall_clock_s);
                if let Some(e) = &t.error {
                    print!(": {e}");
                }
                let failed: Vec<&str> = t.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
                if !failed.is_empty() {
                    print!(": {}", failed.join(", "));
                }
                println!();
            }
            println!("results in {}", manifest.output_dir.display());
            Ok(if manifest.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Validate { config } => {
            let c = ExperimentConfig::load(&config)?;
            println!("{}: ok, {} task(s), hash {}", config.display(), c.tasks.len(), c.hash());
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPresets => {
            for name in presets::names() {
                let c = presets::load(name)?;
                println!("{name:<22} {}", c.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ShowPreset { name } => {
            print!("{}", presets::source(&name)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
