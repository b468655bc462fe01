use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinchaos::{fixtures, Error};
use spinchaos_cli::run::{fixture_text, read_config};
use spinchaos_cli::{run, validate, CliError, CliResult, THREADS_ENV};

/// Exit status when a run completes but one of its asserted checks fails.
const CHECKS_FAILED: u8 = 5;

#[derive(Parser)]
#[command(name = "spinchaos", version, about = "Disorder chaos experiments on spin-glass hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List built-in hypergraphs.
    Fixtures {
        /// Also write each fixture as `<name>.hg` into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Configuration(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn execute(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Run { config } => {
            configure_threads()?;
            let cfg = read_config(&config)?;
            let summary = run(&cfg, &base_dir(&config))?;
            println!("{}: {}", spinchaos_cli::config::kind_name(summary.experiment), summary.headline);
            for f in &summary.files {
                println!("  wrote {}", cfg.output.join(f).display());
            }
            Ok(if summary.passed == Some(false) { CHECKS_FAILED } else { 0 })
        }
        Command::Validate { config } => {
            let cfg = read_config(&config)?;
            validate(&cfg, &base_dir(&config))?;
            println!("{} is valid", config.display());
            Ok(0)
        }
        Command::Fixtures { write } => {
            let catalog = fixtures::catalog()?;
            for f in &catalog {
                println!(
                    "{:<20} N={:<3} edges={:<3} {}",
                    f.name,
                    f.graph.n_vertices(),
                    f.graph.n_edges(),
                    f.description
                );
            }
            if let Some(dir) = write {
                std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
                for f in &catalog {
                    let path = dir.join(format!("{}.hg", f.name));
                    std::fs::write(&path, fixture_text(f.name)?)
                        .map_err(|source| CliError::Io { path: path.clone(), source })?;
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
