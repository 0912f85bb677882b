//! JSON run manifests and reruns.

use std::fs;
use std::path::{Path, PathBuf};

use cm_duel::sim::SimConfig;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::commands::{CliError, CliResult, Command, Output};

pub const TOOL: &str = "cm-duel";

/// Everything needed to reproduce a run's output files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    /// Arguments as given, with defaults filled in.
    pub config: Command,
    /// Simulation settings derived from `config`.
    pub resolved: Option<SimConfig>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(cmd: &Command, out: &Output) -> Self {
        RunManifest {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: cmd.name().to_string(),
            seed: cmd.seed(),
            config: cmd.clone(),
            resolved: out.resolved.clone(),
            outputs: out.files.iter().map(|(p, _)| p.clone()).collect(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        write_file(path, text.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// How a rerun treats the recorded outputs.
#[derive(Debug, Clone)]
pub enum RerunMode {
    /// Overwrite the recorded paths.
    Rewrite,
    /// Write under another directory, keeping file names.
    Redirect(PathBuf),
    /// Compare against the recorded files without writing.
    Check,
}

/// Re-executes a manifest. Returns the command output and, in check mode,
/// the recorded files whose bytes differ.
pub fn rerun(path: &Path, mode: &RerunMode) -> CliResult<(Output, Vec<PathBuf>)> {
    let m = RunManifest::load(path)?;
    if m.tool != TOOL {
        return Err(CliError::Invalid(format!(
            "{} is not a {TOOL} manifest",
            path.display()
        )));
    }
    if m.version != env!("CARGO_PKG_VERSION") {
        warn!(
            "manifest written by version {}, running {}",
            m.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut cmd = m.config;
    if let (RerunMode::Redirect(dir), Some(o)) = (mode, cmd.output_args_mut()) {
        o.out = o.out.as_ref().and_then(|p| p.file_name()).map(|name| dir.join(name));
    }
    let mut out = cmd.execute()?;
    let mut differing = Vec::new();
    if let RerunMode::Check = mode {
        for (p, bytes) in &out.files {
            let old = fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            if &old != bytes {
                differing.push(p.clone());
            }
        }
        out.files.clear();
    }
    Ok((out, differing))
}
