//! Ground-truth world for end-to-end checks.
//!
//! Latents are i.i.d. standard normal (optionally truncated by per-component
//! rejection), and the score of a latent is `sigmoid(v · x + bias)` plus
//! Gaussian noise, clipped to `[0, 1]`. The hidden unit direction `v` is what
//! the hyperplane fit should recover.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::LayerStructure;
use crate::error::{Error, Result};
use crate::matrix::{check_dim, dot, norm, Matrix};
use crate::rng::Xoshiro256StarStar;

const DIRECTION_STREAM: u64 = 0;
const SAMPLE_STREAM_BASE: u64 = 1;
const NOISE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub dim: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub truncation_psi: Option<f64>,
    pub layer_structure: Option<LayerStructure>,
    /// Restrict the true direction to one layer block (requires a layer structure).
    pub sparse_layer: Option<usize>,
}

impl WorldConfig {
    pub fn new(dim: usize, seed: u64, noise_sigma: f64) -> Self {
        Self { dim, seed, noise_sigma, truncation_psi: None, layer_structure: None, sparse_layer: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub dim: usize,
    pub true_direction: Vec<f64>,
    pub true_bias: f64,
    pub noise_sigma: f64,
    pub truncation_psi: Option<f64>,
    pub seed: u64,
    pub layer_structure: Option<LayerStructure>,
    #[serde(default)]
    pub sparse_layer: Option<usize>,
}

impl SyntheticWorld {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!("world dimension {} must be at least 2", self.dim)));
        }
        check_dim(self.dim, self.true_direction.len())?;
        let n = norm(&self.true_direction);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("true direction has norm {n}")));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        if let Some(psi) = self.truncation_psi {
            if !(psi > 0.0 && psi.is_finite()) {
                return Err(Error::InvalidConfig(format!("truncation psi {psi} must be > 0")));
            }
        }
        if let Some(ls) = self.layer_structure {
            check_dim(self.dim, ls.dim())?;
        }
        if !self.true_bias.is_finite() {
            return Err(Error::InvalidConfig("non-finite bias".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("world serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let world: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        world.validate()?;
        Ok(world)
    }

    /// Noise-free score of a single latent.
    pub fn noiseless_score(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.true_direction, x) + self.true_bias)
    }
}

fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// Draws the hidden unit direction from the seed; bias is 0.
pub fn make_world(config: &WorldConfig) -> Result<SyntheticWorld> {
    if config.dim < 2 {
        return Err(Error::InvalidConfig(format!("world dimension {} must be at least 2", config.dim)));
    }
    if let Some(ls) = config.layer_structure {
        check_dim(config.dim, ls.dim())?;
    }
    let block = match (config.sparse_layer, config.layer_structure) {
        (Some(layer), Some(ls)) => {
            if layer >= ls.layers {
                return Err(Error::LayerOutOfRange { index: layer, layers: ls.layers });
            }
            ls.span(layer)
        }
        (Some(_), None) => {
            return Err(Error::InvalidConfig("sparse layer requires a layer structure".into()));
        }
        (None, _) => 0..config.dim,
    };
    let mut rng = Xoshiro256StarStar::from_seed_stream(config.seed, DIRECTION_STREAM);
    let mut v = vec![0.0; config.dim];
    for x in &mut v[block] {
        *x = rng.next_normal();
    }
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    let world = SyntheticWorld {
        dim: config.dim,
        true_direction: v,
        true_bias: 0.0,
        noise_sigma: config.noise_sigma,
        truncation_psi: config.truncation_psi,
        seed: config.seed,
        layer_structure: config.layer_structure,
        sparse_layer: config.sparse_layer,
    };
    world.validate()?;
    Ok(world)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    /// Overrides the world's truncation when set.
    pub truncation_psi: Option<f64>,
    /// Independent sample streams from the same world (e.g. train vs. test).
    pub stream: u64,
}

impl SamplerConfig {
    pub fn new(n: usize) -> Self {
        Self { n, truncation_psi: None, stream: 0 }
    }
}

/// `n × d` standard-normal latents; with truncation, each component is
/// redrawn until `|value| <= psi`.
pub fn sample_latents(world: &SyntheticWorld, config: &SamplerConfig) -> Result<Matrix> {
    if config.n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    let psi = config.truncation_psi.or(world.truncation_psi);
    if let Some(psi) = psi {
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(Error::InvalidConfig(format!("truncation psi {psi} must be > 0")));
        }
    }
    let mut rng = Xoshiro256StarStar::from_seed_stream(world.seed, SAMPLE_STREAM_BASE.wrapping_add(config.stream));
    let data = (0..config.n * world.dim)
        .map(|_| loop {
            let z = rng.next_normal();
            match psi {
                Some(p) if z.abs() > p => continue,
                _ => break z,
            }
        })
        .collect();
    Matrix::from_vec(config.n, world.dim, data)
}

/// Oracle scores for each row of `x`. Noise comes from a fixed stream of the
/// world seed, so scoring the same matrix twice gives identical results.
pub fn score(world: &SyntheticWorld, x: &Matrix, noiseless: bool) -> Result<Vec<f64>> {
    check_dim(world.dim, x.cols())?;
    let mut rng = Xoshiro256StarStar::from_seed_stream(world.seed, NOISE_STREAM);
    Ok(x.iter_rows()
        .map(|row| {
            let clean = world.noiseless_score(row);
            if noiseless || world.noise_sigma == 0.0 {
                clean
            } else {
                (clean + world.noise_sigma * rng.next_normal()).clamp(0.0, 1.0)
            }
        })
        .collect())
}

/// Averages the layer rows of each extended latent into one `D`-vector: a
/// lossy plain-space view of `n × (L·D)` data.
pub fn layer_mean_projection(x: &Matrix, structure: LayerStructure) -> Result<Matrix> {
    check_dim(structure.dim(), x.cols())?;
    let d = structure.layer_dim;
    let inv = 1.0 / structure.layers as f64;
    let mut data = Vec::with_capacity(x.rows() * d);
    for row in x.iter_rows() {
        let mut acc = vec![0.0; d];
        for l in 0..structure.layers {
            acc.iter_mut().zip(&row[structure.span(l)]).for_each(|(a, v)| *a += v);
        }
        data.extend(acc.into_iter().map(|a| a * inv));
    }
    Matrix::from_vec(x.rows(), d, data)
}
