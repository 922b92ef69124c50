use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use memshift::synthetic::layer_mean_projection;
use memshift::tensor_io::{self, DType, Tensor};
use memshift::{make_world, sample_latents, score, LayerStructure, SamplerConfig, WorldConfig};

use super::{ensure_dir, usage};
use crate::manifest::Run;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Latent dimension (implied by --layers when given).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Extended-space layout, e.g. 18x512; latents are written as n×L×D.
    #[arg(long)]
    pub layers: Option<LayerStructure>,
    /// Put the true direction on this layer only.
    #[arg(long, requires = "layers")]
    pub sparse_layer: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, env = crate::SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Score noise standard deviation.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Per-component truncation threshold.
    #[arg(long)]
    pub psi: Option<f64>,
    /// Sample stream; different streams give independent latents from one world.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Also write the layer-mean plain-space projection (requires --layers).
    #[arg(long, requires = "layers")]
    pub emit_z: bool,
    /// Store latents as f32 instead of f64.
    #[arg(long)]
    pub f32: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(a: &SynthArgs, run: &mut Run) -> anyhow::Result<Option<u64>> {
    let dim = match (a.dim, a.layers) {
        (Some(d), Some(ls)) if d != ls.dim() => {
            return Err(usage(format!("--dim {d} disagrees with --layers {ls}")));
        }
        (_, Some(ls)) => ls.dim(),
        (Some(d), None) => d,
        (None, None) => return Err(usage("one of --dim or --layers is required")),
    };
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let config = WorldConfig {
        dim,
        seed: a.seed,
        noise_sigma: a.sigma,
        truncation_psi: a.psi,
        layer_structure: a.layers,
        sparse_layer: a.sparse_layer,
    };
    let world = make_world(&config)?;
    world.validate()?;
    let latents = sample_latents(&world, &SamplerConfig { n: a.n, truncation_psi: None, stream: a.stream })?;
    let scores = score(&world, &latents, false)?;

    ensure_dir(&a.out_dir)?;
    let dtype = if a.f32 { DType::F32 } else { DType::F64 };
    let shape = match a.layers {
        Some(ls) => vec![a.n, ls.layers, ls.layer_dim],
        None => vec![a.n, dim],
    };
    let latents_path = a.out_dir.join("latents.ltm");
    tensor_io::save_tensor(&Tensor::from_matrix_as(&latents, shape, dtype)?, &latents_path)
        .with_context(|| format!("writing {}", latents_path.display()))?;
    run.output(&latents_path);

    if a.emit_z {
        let ls = a.layers.expect("clap enforces --layers");
        let z = layer_mean_projection(&latents, ls)?;
        let z_path = a.out_dir.join("latents_z.ltm");
        tensor_io::save_tensor(&Tensor::from_matrix_as(&z, vec![a.n, ls.layer_dim], dtype)?, &z_path)?;
        run.output(&z_path);
    }

    let scores_path = a.out_dir.join("scores.csv");
    tensor_io::save_scores(&scores, &scores_path)?;
    run.output(&scores_path);
    let world_path = a.out_dir.join("world.json");
    world.save(&world_path)?;
    run.output(&world_path);

    run.config("dim", dim);
    run.config("n", a.n);
    run.config("seed", a.seed);
    run.config("sigma", a.sigma);
    run.config("psi", a.psi.map_or("none".to_string(), |p| p.to_string()));
    run.config("stream", a.stream);
    if let Some(ls) = a.layers {
        run.config("layers", ls);
    }
    if let Some(l) = a.sparse_layer {
        run.config("sparse_layer", l);
    }
    run.config("dtype", if a.f32 { "f32" } else { "f64" });
    run.set_manifest_path(a.out_dir.join("manifest.json"));
    println!("wrote {} samples of dimension {dim} to {}", a.n, a.out_dir.display());
    Ok(Some(a.seed))
}
