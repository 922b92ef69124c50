use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use memshift::hyperplane::fit_with_validation;
use memshift::tensor_io;
use memshift::{split, LabeledDataset, SpaceTag};

use super::{load_scores, load_tensor, FitFlags};
use crate::manifest::{beside, Run};

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    /// Space tag recorded on the hyperplane; defaults to w+ for n×L×D input, z otherwise.
    #[arg(long)]
    pub space: Option<SpaceTag>,
    #[command(flatten)]
    pub flags: FitFlags,
    /// Hyperplane JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn table_header() -> String {
    format!("{:<6} {:<9} {:>8} {:>7} {:>10} {:>9}", "space", "threshold", "n_train", "n_val", "train_acc", "val_acc")
}

pub fn run(a: &FitArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let (latents, structure) = load_tensor(&a.latents, run)?.to_matrix();
    let scores = load_scores(&a.scores, run)?;
    let (data, threshold) = LabeledDataset::from_scores(latents, scores, a.flags.threshold, structure)?;
    let (train, val) = split(&data, a.flags.split_spec())?;
    let out = fit_with_validation(&train, &val, &a.flags.fit_config())?;
    let mut h = out.hyperplane;
    if let Some(space) = a.space {
        h.space_tag = space;
    }
    h.meta.insert("threshold_strategy".into(), a.flags.threshold.name().into());
    h.meta.insert("threshold".into(), threshold.to_string());
    h.meta.insert("n_train".into(), train.len().to_string());
    h.meta.insert("n_val".into(), val.len().to_string());
    h.meta.insert("split".into(), format!("{}/{} seed {}", a.flags.train_fraction, 1.0 - a.flags.train_fraction, a.flags.seed));
    h.meta.insert("iterations".into(), out.iterations.to_string());
    h.meta.insert("converged".into(), out.converged.to_string());
    h.meta.insert("final_loss".into(), out.loss_history.last().copied().unwrap_or(f64::NAN).to_string());

    tensor_io::save_hyperplane(&h.to_record(), &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    run.output(&a.out);
    a.flags.record(run);
    run.config("space", h.space_tag.as_str());
    run.set_manifest_path(beside(&a.out));

    let train_acc = h.train_accuracy.unwrap_or(f64::NAN);
    let val_acc = h.val_accuracy.unwrap_or(f64::NAN);
    println!("Accuracy of the separating hyperplane");
    println!("{}", table_header());
    println!(
        "{:<6} {:<9} {:>8} {:>7} {:>10.4} {:>9.4}",
        h.space_tag.as_str(),
        a.flags.threshold.name(),
        train.len(),
        val.len(),
        train_acc,
        val_acc
    );
    Ok(Some(a.flags.seed))
}
