pub mod compare;
pub mod condition;
pub mod edit;
pub mod fit;
pub mod metrics;
pub mod replay;
pub mod sweep;
pub mod synth;

use std::fs;
use std::path::Path;

use anyhow::Context;
use clap::Args;
use memshift::tensor_io::{self, Tensor};
use memshift::{FitConfig, Hyperplane, LayerStructure, Matrix, SplitSpec, ThresholdStrategy};

use crate::manifest::Run;

/// Invalid combination of otherwise well-formed flags.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Optimizer and labeling flags shared by `fit` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct FitFlags {
    /// Labeling threshold.
    #[arg(long, default_value = "mean")]
    pub threshold: ThresholdStrategy,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Split seed.
    #[arg(long, env = crate::SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Fit on raw features instead of standardized ones.
    #[arg(long)]
    pub no_standardize: bool,
}

impl FitFlags {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            l2_lambda: self.l2,
            max_iters: self.max_iters,
            tol: self.tol,
            learning_rate: self.lr,
            standardize: !self.no_standardize,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec { train_fraction: self.train_fraction, seed: self.seed }
    }

    pub fn record(&self, run: &mut Run) {
        run.config("threshold", self.threshold.name());
        run.config("train_fraction", self.train_fraction);
        run.config("seed", self.seed);
        run.config("l2_lambda", self.l2);
        run.config("max_iters", self.max_iters);
        run.config("tol", self.tol);
        run.config("learning_rate", self.lr);
        run.config("standardize", !self.no_standardize);
    }
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str, run: &mut Run) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    run.output(path);
    Ok(())
}

pub fn load_tensor(path: &Path, run: &mut Run) -> anyhow::Result<Tensor> {
    let t = tensor_io::load_tensor(path).with_context(|| format!("loading {}", path.display()))?;
    run.input(path);
    Ok(t)
}

pub fn load_scores(path: &Path, run: &mut Run) -> anyhow::Result<Vec<f64>> {
    let s = tensor_io::load_scores(path).with_context(|| format!("loading {}", path.display()))?;
    run.input(path);
    Ok(s)
}

pub fn load_hyperplane(path: &Path, run: &mut Run) -> anyhow::Result<Hyperplane> {
    let rec = tensor_io::load_hyperplane(path).with_context(|| format!("loading {}", path.display()))?;
    run.input(path);
    Ok(Hyperplane::from_record(&rec)?)
}

/// Attribute directions: hyperplane JSON files contribute their normal, LTM1
/// files contribute every row.
pub fn load_directions(paths: &[std::path::PathBuf], run: &mut Run) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for p in paths {
        if p.extension().is_some_and(|e| e == "json") {
            out.push(load_hyperplane(p, run)?.normal().to_vec());
        } else {
            let (m, _) = load_tensor(p, run)?.to_matrix();
            out.extend(m.iter_rows().map(<[f64]>::to_vec));
        }
    }
    Ok(out)
}

/// Latents as samples-by-features, plus the layer structure from a 3-D file
/// or, failing that, from the hyperplane.
pub fn latents_for(tensor: &Tensor, h: &Hyperplane) -> anyhow::Result<(Matrix, Option<LayerStructure>)> {
    let (m, ls) = tensor.to_matrix();
    Ok((m, ls.or(h.layer_structure)))
}

pub fn save_like(input: &Tensor, m: &Matrix, path: &Path, run: &mut Run) -> anyhow::Result<()> {
    let t = Tensor::from_matrix_as(m, input.shape().to_vec(), input.dtype())?;
    tensor_io::save_tensor(&t, path).with_context(|| format!("writing {}", path.display()))?;
    run.output(path);
    Ok(())
}

pub fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}
