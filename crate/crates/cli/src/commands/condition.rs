use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use memshift::{condition_direction, tensor_io};

use super::{load_directions, load_hyperplane};
use crate::manifest::{beside, Run};

#[derive(Debug, Args)]
pub struct ConditionArgs {
    #[arg(long)]
    pub hyperplane: PathBuf,
    /// Attribute directions to hold fixed (hyperplane JSON or LTM1 rows).
    #[arg(long, value_delimiter = ',', required = true)]
    pub attrs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: &ConditionArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let h = load_hyperplane(&a.hyperplane, run)?;
    let attrs = load_directions(&a.attrs, run)?;
    let conditioned = condition_direction(&h, &attrs)?;
    tensor_io::save_hyperplane(&conditioned.to_record(), &a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    run.output(&a.out);
    run.config("attributes", attrs.len());
    run.set_manifest_path(beside(&a.out));
    let retained = conditioned.meta.get("conditioned_on").cloned().unwrap_or_default();
    println!("conditioned on {retained} independent attribute directions");
    Ok(None)
}
