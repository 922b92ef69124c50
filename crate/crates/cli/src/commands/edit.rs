use std::path::PathBuf;

use clap::Args;
use memshift::edit::{apply_rows, edit_rows, EditSpec, LayerMask};
use memshift::tensor_io::Tensor;
use memshift::{score, Hyperplane, LayerStructure, Matrix, SyntheticWorld};

use super::{load_directions, load_hyperplane, load_tensor, save_like, usage, write_text};
use crate::manifest::{beside, Run};

#[derive(Debug, Args)]
pub struct EditArgs {
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long)]
    pub hyperplane: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Edit only these layers (comma-separated indices).
    #[arg(long, value_delimiter = ',')]
    pub layers: Vec<usize>,
    /// Attribute directions to hold fixed (hyperplane JSON or LTM1 rows).
    #[arg(long, value_delimiter = ',')]
    pub condition: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LayerwiseArgs {
    /// n×L×D latents, or a single L×D latent.
    #[arg(long)]
    pub latents: PathBuf,
    #[arg(long)]
    pub hyperplane: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub layers: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Score before and after with this synthetic world and write a report.
    #[arg(long, requires = "report")]
    pub world: Option<PathBuf>,
    #[arg(long, requires = "world")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub noiseless: bool,
}

/// Samples-by-features view of a latent file for hyperplane `h`.
///
/// A 2-D file whose total size matches the hyperplane but whose width does
/// not is read as one `L × D` extended latent.
pub fn samples_for(t: &Tensor, h: &Hyperplane) -> anyhow::Result<(Matrix, Option<LayerStructure>)> {
    if let [l, d] = *t.shape() {
        if d != h.dim() && l * d == h.dim() {
            let m = Matrix::from_vec(1, l * d, t.to_f64_vec())?;
            return Ok((m, Some(LayerStructure { layers: l, layer_dim: d })));
        }
    }
    super::latents_for(t, h)
}

pub fn layer_mask(layers: &[usize], structure: Option<LayerStructure>) -> anyhow::Result<Option<LayerMask>> {
    if layers.is_empty() {
        return Ok(None);
    }
    let ls = structure.ok_or_else(|| usage("--layers needs n×L×D latents or a hyperplane with a layer structure"))?;
    Ok(Some(LayerMask::new(ls, layers.iter().copied())?))
}

pub fn run(a: &EditArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let tensor = load_tensor(&a.latents, run)?;
    let h = load_hyperplane(&a.hyperplane, run)?;
    let (latents, structure) = samples_for(&tensor, &h)?;
    let spec = EditSpec {
        alpha: a.alpha,
        layer_mask: layer_mask(&a.layers, structure)?,
        conditions: load_directions(&a.condition, run)?,
    };
    let edited = apply_rows(&latents, &h, &spec)?;
    save_like(&tensor, &edited, &a.out, run)?;
    run.config("alpha", a.alpha);
    run.config("layers", super::join(&a.layers));
    run.config("conditions", spec.conditions.len());
    run.set_manifest_path(beside(&a.out));
    println!("edited {} latents by alpha {}", latents.rows(), a.alpha);
    Ok(None)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn run_layerwise(a: &LayerwiseArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let tensor = load_tensor(&a.latents, run)?;
    let h = load_hyperplane(&a.hyperplane, run)?;
    let (latents, structure) = samples_for(&tensor, &h)?;
    let mask = layer_mask(&a.layers, structure)?.expect("clap requires --layers");
    let edited = edit_rows(&latents, &h, a.alpha, Some(&mask))?;
    save_like(&tensor, &edited, &a.out, run)?;

    if let (Some(world_path), Some(report)) = (&a.world, &a.report) {
        let world = SyntheticWorld::load(world_path)?;
        run.input(world_path);
        let before = score(&world, &latents, a.noiseless)?;
        let after = score(&world, &edited, a.noiseless)?;
        let csv = format!(
            "layers,alpha,mean_before,mean_after\n{},{},{},{}\n",
            mask.layers().iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            a.alpha,
            mean(&before),
            mean(&after)
        );
        write_text(report, &csv, run)?;
        println!("mean score {:.4} -> {:.4}", mean(&before), mean(&after));
    }
    run.config("alpha", a.alpha);
    run.config("layers", super::join(mask.layers()));
    run.config("noiseless", a.noiseless);
    run.set_manifest_path(beside(&a.out));
    Ok(None)
}
