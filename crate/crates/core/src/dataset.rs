use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Xoshiro256StarStar;

/// Layer layout of a flattened extended-space latent: `layers` rows of
/// `layer_dim` values, stored row after row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerStructure {
    pub layers: usize,
    pub layer_dim: usize,
}

impl LayerStructure {
    pub fn dim(&self) -> usize {
        self.layers * self.layer_dim
    }

    /// Column range of `layer` in the flattened vector.
    pub fn span(&self, layer: usize) -> std::ops::Range<usize> {
        layer * self.layer_dim..(layer + 1) * self.layer_dim
    }
}

impl std::fmt::Display for LayerStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.layers, self.layer_dim)
    }
}

impl std::str::FromStr for LayerStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("layer structure {s:?} is not of the form LxD"));
        let (l, d) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let layers: usize = l.trim().parse().map_err(|_| bad())?;
        let layer_dim: usize = d.trim().parse().map_err(|_| bad())?;
        if layers == 0 || layer_dim == 0 {
            return Err(bad());
        }
        Ok(Self { layers, layer_dim })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStrategy {
    #[default]
    Mean,
    Median,
}

impl ThresholdStrategy {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdStrategy::Mean => "mean",
            ThresholdStrategy::Median => "median",
        }
    }
}

impl std::str::FromStr for ThresholdStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "median" => Ok(Self::Median),
            other => Err(Error::InvalidConfig(format!("unknown threshold strategy {other:?}"))),
        }
    }
}

/// Labels scores against their mean or median.
///
/// A sample is positive (highly scored) iff its score is strictly above the
/// threshold; ties go to the negative class.
pub fn label_by_threshold(scores: &[f64], strategy: ThresholdStrategy) -> Result<(Vec<u8>, f64)> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let threshold = match strategy {
        ThresholdStrategy::Mean => scores.iter().sum::<f64>() / n as f64,
        ThresholdStrategy::Median => {
            let mut sorted = scores.to_vec();
            sorted.sort_by(f64::total_cmp);
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
    };
    let labels: Vec<u8> = scores.iter().map(|&s| u8::from(s > threshold)).collect();
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateLabeling { threshold, positives, n });
    }
    Ok((labels, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 0 }
    }
}

/// Latents with their scores and derived binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    latents: Matrix,
    scores: Vec<f64>,
    labels: Vec<u8>,
    layer_structure: Option<LayerStructure>,
}

impl LabeledDataset {
    pub fn new(
        latents: Matrix,
        scores: Vec<f64>,
        labels: Vec<u8>,
        layer_structure: Option<LayerStructure>,
    ) -> Result<Self> {
        let n = latents.rows();
        if scores.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: scores.len() });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidConfig("labels must be 0 or 1".into()));
        }
        if let Some(ls) = layer_structure {
            if ls.dim() != latents.cols() {
                return Err(Error::DimensionMismatch { expected: ls.dim(), got: latents.cols() });
            }
        }
        Ok(Self { latents, scores, labels, layer_structure })
    }

    /// Builds a dataset by thresholding `scores`; returns the threshold used.
    pub fn from_scores(
        latents: Matrix,
        scores: Vec<f64>,
        strategy: ThresholdStrategy,
        layer_structure: Option<LayerStructure>,
    ) -> Result<(Self, f64)> {
        if scores.len() != latents.rows() {
            return Err(Error::DimensionMismatch { expected: latents.rows(), got: scores.len() });
        }
        let (labels, threshold) = label_by_threshold(&scores, strategy)?;
        Ok((Self::new(latents, scores, labels, layer_structure)?, threshold))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.latents.cols()
    }

    pub fn latents(&self) -> &Matrix {
        &self.latents
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn layer_structure(&self) -> Option<LayerStructure> {
        self.layer_structure
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            latents: self.latents.select_rows(indices),
            scores: indices.iter().map(|&i| self.scores[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            layer_structure: self.layer_structure,
        }
    }
}

/// Seeded permutation of `0..n`: Fisher–Yates driven by xoshiro256** seeded
/// through splitmix64.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    Xoshiro256StarStar::seed_from_u64(seed).shuffle(&mut idx);
    idx
}

/// Deterministic train/validation split; the first `ceil(fraction · n)`
/// permuted indices go to training.
pub fn split(data: &LabeledDataset, spec: SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let n = data.len();
    if n < 10 {
        return Err(Error::TooFewSamples { need: 10, got: n });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {} not in (0, 1)",
            spec.train_fraction
        )));
    }
    let perm = permutation(n, spec.seed);
    let n_train = (spec.train_fraction * n as f64).ceil() as usize;
    if n_train >= n {
        return Err(Error::InvalidConfig(format!(
            "train fraction {} leaves no validation samples out of {n}",
            spec.train_fraction
        )));
    }
    let (train_idx, val_idx) = perm.split_at(n_train);
    Ok((data.subset(train_idx), data.subset(val_idx)))
}
