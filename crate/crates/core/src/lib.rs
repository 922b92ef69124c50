//! Linear attribute directions in generative latent spaces.
//!
//! Scores attached to latent codes are thresholded into two classes, a
//! logistic-regression hyperplane separates them, and its unit normal becomes
//! an edit direction: moving a latent by `alpha` along the normal shifts its
//! signed distance to the hyperplane by exactly `alpha`. The crate also carries
//! the evaluation side (rank correlations, FID/KID realness ratios, sweep
//! statistics) and a synthetic ground-truth world used to verify the pipeline
//! end to end.

pub mod dataset;
pub mod edit;
pub mod error;
pub mod hyperplane;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod synthetic;
pub mod tensor_io;

pub use dataset::{label_by_threshold, split, LabeledDataset, LayerStructure, SplitSpec, ThresholdStrategy};
pub use edit::{condition_direction, edit, layerwise_edit, sweep, EditSpec, EditTrajectory, LayerMask};
pub use error::{Error, Result};
pub use hyperplane::{accuracy, compare_spaces, direction_score, fit, FitConfig, FitOutcome, Hyperplane, SpaceComparison, SpaceTag};
pub use matrix::Matrix;
pub use rng::Xoshiro256StarStar;
pub use synthetic::{make_world, sample_latents, score, SamplerConfig, SyntheticWorld, WorldConfig};
