//! Evaluation metrics: rank agreement between score vectors, realness of
//! edited samples through FID and KID on externally extracted features, and
//! per-alpha score distributions for edit sweeps.

mod fid;
mod kid;
mod rank;
mod sweep;

pub use fid::{fid, fid_from_moments, moments, GaussianMoments};
pub use kid::{kid, mmd2_biased, mmd2_unbiased, polynomial_kernel, KidConfig, KidEstimate};
pub use rank::{average_ranks, kendall_tau, spearman_rho};
pub use sweep::{sweep_report, AlphaStats, Histogram, SweepReport, HISTOGRAM_BINS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_dim, Matrix};

/// Feature embeddings of a sample set (one row per image).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    features: Matrix,
    pub source_tag: String,
}

impl FeatureSet {
    pub fn new(features: Matrix, source_tag: impl Into<String>) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::TooFewSamples { need: 2, got: features.rows() });
        }
        if features.cols() == 0 {
            return Err(Error::InvalidShape("feature dimension is zero".into()));
        }
        if let Some(index) = features.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { features, source_tag: source_tag.into() })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealnessRatio {
    pub fid_modified: f64,
    pub fid_baseline: f64,
    pub fid_ratio: f64,
    pub kid_modified: f64,
    pub kid_baseline: f64,
    pub kid_ratio: f64,
}

/// FID and KID of `modified` against `reference`, each divided by the same
/// metric for `baseline`. A ratio near one means the edit kept the baseline's
/// level of realness.
pub fn realness_ratio(
    modified: &FeatureSet,
    baseline: &FeatureSet,
    reference: &FeatureSet,
    kid_config: &KidConfig,
) -> Result<RealnessRatio> {
    check_dim(reference.dim(), modified.dim())?;
    check_dim(reference.dim(), baseline.dim())?;
    let reference_moments = moments(reference)?;
    let fid_baseline = fid_from_moments(&moments(baseline)?, &reference_moments)?;
    let kid_baseline = kid(baseline, reference, kid_config)?.mean;
    if fid_baseline.is_nan() || fid_baseline <= 0.0 {
        return Err(Error::ZeroBaseline(fid_baseline));
    }
    if kid_baseline.is_nan() || kid_baseline <= 0.0 {
        return Err(Error::ZeroBaseline(kid_baseline));
    }
    let fid_modified = fid_from_moments(&moments(modified)?, &reference_moments)?;
    let kid_modified = kid(modified, reference, kid_config)?.mean;
    Ok(RealnessRatio {
        fid_modified,
        fid_baseline,
        fid_ratio: fid_modified / fid_baseline,
        kid_modified,
        kid_baseline,
        kid_ratio: kid_modified / kid_baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256StarStar;

    fn gaussian(seed: u64, n: usize, d: usize, shift: f64) -> FeatureSet {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let data = (0..n * d).map(|_| rng.next_normal() + shift).collect();
        FeatureSet::new(Matrix::from_vec(n, d, data).unwrap(), "gauss").unwrap()
    }

    #[test]
    fn feature_set_validation() {
        assert!(FeatureSet::new(Matrix::zeros(1, 3), "x").is_err());
        let bad = Matrix::from_vec(2, 1, vec![0.0, f64::NAN]).unwrap();
        assert!(matches!(FeatureSet::new(bad, "x"), Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn ratio_of_baseline_with_itself_is_one() {
        let cfg = KidConfig { subset_size: 100, num_subsets: 5, seed: 3 };
        let base = gaussian(1, 300, 4, 0.5);
        let reference = gaussian(2, 300, 4, 0.0);
        let r = realness_ratio(&base, &base, &reference, &cfg).unwrap();
        assert!((r.fid_ratio - 1.0).abs() <= 1e-6);
        assert!((r.kid_ratio - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn modified_equal_to_reference_gives_zero_fid_ratio() {
        let cfg = KidConfig { subset_size: 100, num_subsets: 5, seed: 3 };
        let base = gaussian(1, 300, 4, 0.5);
        let reference = gaussian(2, 300, 4, 0.0);
        let r = realness_ratio(&reference, &base, &reference, &cfg).unwrap();
        assert!(r.fid_ratio.abs() <= 1e-6, "{}", r.fid_ratio);
        assert!(r.kid_ratio.abs() < 0.5, "{}", r.kid_ratio);
    }

    #[test]
    fn zero_baseline_rejected() {
        let cfg = KidConfig { subset_size: 50, num_subsets: 2, seed: 0 };
        let reference = gaussian(2, 100, 3, 0.0);
        assert!(matches!(
            realness_ratio(&reference, &reference, &reference, &cfg),
            Err(Error::ZeroBaseline(_))
        ));
    }
}
