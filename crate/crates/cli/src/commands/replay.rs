use std::path::PathBuf;

use anyhow::Context;
use clap::Args;

use crate::manifest::{sha256_file, RunManifest};

#[derive(Debug, thiserror::Error)]
#[error("replay differs from the recorded run: {0}")]
pub struct ReplayMismatch(pub String);

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Skip comparing regenerated outputs with the recorded hashes.
    #[arg(long)]
    pub no_verify: bool,
}

/// Re-runs the recorded arguments from the recorded working directory and
/// checks every output against its recorded SHA-256.
pub fn run(a: &ReplayArgs) -> anyhow::Result<()> {
    let manifest_path = std::fs::canonicalize(&a.manifest)
        .with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    let manifest = RunManifest::load(&manifest_path)?;
    std::env::set_current_dir(&manifest.cwd)
        .with_context(|| format!("entering recorded directory {}", manifest.cwd.display()))?;
    crate::run(manifest.args.clone())?;
    if a.no_verify {
        return Ok(());
    }
    let mut mismatched = Vec::new();
    for out in &manifest.outputs {
        if sha256_file(&out.path)? != out.sha256 {
            mismatched.push(out.path.display().to_string());
        }
    }
    if !mismatched.is_empty() {
        return Err(ReplayMismatch(mismatched.join(", ")).into());
    }
    println!("replayed {}: {} outputs identical", manifest.command, manifest.outputs.len());
    Ok(())
}
