//! `cm-duel`: symbol-wise against bit-wise decoding of Gray-labeled PAM
//! coded modulation, from the command line.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on invalid input, 3 when a
//! `verify` check or a `rerun --check` comparison fails.

mod commands;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliResult, Command, Output};
use manifest::{write_file, RerunMode, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "cm-duel", version, about)]
struct Cli {
    /// Progress logging on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Top,
}

#[derive(Debug, Subcommand)]
enum Top {
    #[command(flatten)]
    Run(Command),
    /// Re-execute a run manifest and reproduce its output files.
    Rerun {
        manifest: PathBuf,
        /// Write outputs under this directory instead of the recorded paths.
        #[arg(long, conflicts_with = "check")]
        out_dir: Option<PathBuf>,
        /// Compare against the recorded files instead of writing; exits 3 on
        /// any difference.
        #[arg(long)]
        check: bool,
    },
}

fn emit(out: &Output) -> CliResult<()> {
    for (path, bytes) in &out.files {
        write_file(path, bytes)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(out.text.as_bytes())
        .map_err(|e| commands::CliError::Io(e.to_string()))
}

fn run(cmd: Command) -> CliResult<bool> {
    let out = cmd.execute()?;
    emit(&out)?;
    if let Some(path) = cmd.output_args().and_then(|o| o.manifest.as_ref()) {
        RunManifest::new(&cmd, &out).save(path)?;
    }
    Ok(out.passed)
}

fn rerun(path: PathBuf, out_dir: Option<PathBuf>, check: bool) -> CliResult<bool> {
    let mode = match (check, out_dir) {
        (true, _) => RerunMode::Check,
        (false, Some(dir)) => RerunMode::Redirect(dir),
        (false, None) => RerunMode::Rewrite,
    };
    let (out, differing) = manifest::rerun(&path, &mode)?;
    emit(&out)?;
    for p in &differing {
        eprintln!("differs: {}", p.display());
    }
    Ok(out.passed && differing.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    let result = match cli.command {
        Top::Run(cmd) => run(cmd),
        Top::Rerun {
            manifest,
            out_dir,
            check,
        } => rerun(manifest, out_dir, check),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
