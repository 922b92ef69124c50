use std::path::PathBuf;

use clap::Args;
use memshift::{compare_spaces, label_by_threshold, LabeledDataset};
use serde_json::json;

use super::{load_scores, load_tensor, write_text, FitFlags};
use crate::manifest::{beside, Run};

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Plain latent-space samples (n×d).
    #[arg(long)]
    pub z_latents: PathBuf,
    /// Extended latent-space samples of the same images (n×L×D or n×d).
    #[arg(long)]
    pub w_latents: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[command(flatten)]
    pub flags: FitFlags,
    /// JSON report to write.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: &CompareArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let (z, _) = load_tensor(&a.z_latents, run)?.to_matrix();
    let (w, w_structure) = load_tensor(&a.w_latents, run)?.to_matrix();
    let scores = load_scores(&a.scores, run)?;
    let (labels, threshold) = label_by_threshold(&scores, a.flags.threshold)?;
    let z_data = LabeledDataset::new(z, scores.clone(), labels.clone(), None)?;
    let w_data = LabeledDataset::new(w, scores, labels, w_structure)?;
    let report = compare_spaces(&z_data, &w_data, &a.flags.fit_config(), a.flags.split_spec())?;

    let body = json!({
        "threshold_strategy": a.flags.threshold.name(),
        "threshold": threshold,
        "z_val_accuracy": report.z_val_accuracy,
        "w_val_accuracy": report.w_val_accuracy,
        "difference": report.difference(),
        "z_train_accuracy": report.z.train_accuracy,
        "w_train_accuracy": report.w.train_accuracy,
    });
    write_text(&a.out, &format!("{}\n", serde_json::to_string_pretty(&body)?), run)?;
    a.flags.record(run);
    run.set_manifest_path(beside(&a.out));

    println!("{:<6} {:>9}", "space", "val_acc");
    println!("{:<6} {:>9.4}", "z", report.z_val_accuracy);
    println!("{:<6} {:>9.4}", "w+", report.w_val_accuracy);
    println!("difference (w+ - z): {:+.4}", report.difference());
    Ok(Some(a.flags.seed))
}
