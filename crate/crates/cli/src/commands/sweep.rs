use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::Context;
use clap::Args;
use memshift::edit::{edit_rows, effective_direction, EditSpec};
use memshift::metrics::sweep_report;
use memshift::tensor_io::{self, Tensor};
use memshift::{score, Matrix, SyntheticWorld};

use super::{ensure_dir, load_directions, load_hyperplane, load_tensor, save_like, usage, write_text};
use crate::commands::edit::{layer_mask, samples_for};
use crate::manifest::Run;

#[derive(Debug, thiserror::Error)]
#[error("external scorer failed: {0}")]
pub struct ScorerError(pub String);

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long)]
    pub hyperplane: PathBuf,
    /// Edit coefficients, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub layers: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub condition: Vec<PathBuf>,
    /// Score with this synthetic world.
    #[arg(long, conflicts_with = "scorer")]
    pub world: Option<PathBuf>,
    /// Omit world score noise.
    #[arg(long, requires = "world")]
    pub noiseless: bool,
    /// External scorer: invoked as `<scorer...> <latents.ltm> <scores.csv>`, must exit 0.
    #[arg(long)]
    pub scorer: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Keep the edited latents for every alpha.
    #[arg(long)]
    pub save_latents: bool,
}

fn external_scores(scorer: &str, latents: &Path, scores: &Path, n: usize) -> anyhow::Result<Vec<f64>> {
    let mut parts = scorer.split_whitespace();
    let program = parts.next().ok_or_else(|| usage("--scorer is empty"))?;
    let status = Command::new(program)
        .args(parts)
        .arg(latents)
        .arg(scores)
        .status()
        .map_err(|e| ScorerError(format!("could not start {program:?}: {e}")))?;
    if !status.success() {
        return Err(ScorerError(format!("{program:?} exited with {status}")).into());
    }
    let s = tensor_io::load_scores(scores).map_err(|e| ScorerError(format!("reading {}: {e}", scores.display())))?;
    if s.len() != n {
        return Err(ScorerError(format!("scorer returned {} scores for {n} latents", s.len())).into());
    }
    Ok(s)
}

pub fn run(a: &SweepArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let tensor: Tensor = load_tensor(&a.latents, run)?;
    let h = load_hyperplane(&a.hyperplane, run)?;
    let (latents, structure) = samples_for(&tensor, &h)?;
    let spec = EditSpec {
        alpha: 0.0,
        layer_mask: layer_mask(&a.layers, structure)?,
        conditions: load_directions(&a.condition, run)?,
    };
    let world = match (&a.world, &a.scorer) {
        (Some(p), None) => {
            let w = SyntheticWorld::load(p)?;
            run.input(p);
            Some(w)
        }
        (None, Some(_)) => None,
        _ => return Err(usage("exactly one of --world or --scorer is required")),
    };
    ensure_dir(&a.out_dir)?;
    // Conditioning is resolved once for the whole sweep.
    let direction = effective_direction(&h, &spec)?;

    let mut per_alpha = Vec::with_capacity(a.alphas.len());
    for (i, &alpha) in a.alphas.iter().enumerate() {
        let edited: Matrix = edit_rows(&latents, &direction, alpha, spec.layer_mask.as_ref())?;
        let latents_path = a.out_dir.join(format!("alpha_{i:03}.ltm"));
        if a.save_latents || a.scorer.is_some() {
            save_like(&tensor, &edited, &latents_path, run)?;
        }
        let scores = match (&world, &a.scorer) {
            (Some(w), _) => score(w, &edited, a.noiseless)?,
            (None, Some(cmd)) => {
                let scores_path = a.out_dir.join(format!("alpha_{i:03}_scores.csv"));
                let s = external_scores(cmd, &latents_path, &scores_path, latents.rows())?;
                run.output(&scores_path);
                s
            }
            (None, None) => unreachable!("checked above"),
        };
        per_alpha.push((alpha, scores));
    }
    let report = sweep_report(&per_alpha)?;
    write_text(&a.out_dir.join("sweep.csv"), &report.to_csv(), run)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    write_text(&a.out_dir.join("sweep.json"), &json, run).context("writing sweep report")?;

    run.config("alphas", super::join(&a.alphas));
    run.config("layers", super::join(&a.layers));
    run.config("conditions", spec.conditions.len());
    run.config("scoring", if a.world.is_some() { "world" } else { "external" });
    run.config("noiseless", a.noiseless);
    run.set_manifest_path(a.out_dir.join("manifest.json"));

    println!("{:>8} {:>10} {:>10}", "alpha", "mean", "std");
    for e in &report.entries {
        println!("{:>8} {:>10.4} {:>10.4}", e.alpha, e.mean, e.std);
    }
    Ok(None)
}
